#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "drwa/core.hpp"
#include "drwa/ep_router.hpp"
#include "drwa/topology.hpp"
#include "drwa/traffic.hpp"
#include "drwa/wavelength.hpp"

namespace drwa {

enum class EventKind { Teardown = 0, Arrival = 1 };

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  RequestId id = 0;
};

/// Queue order: time, then teardowns before arrivals, then id.
struct EventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.id > b.id;
  }
};

struct RunConfig {
  TrafficConfig traffic;
  EpConfig ep;
  int wavelengths = 8;
  StrategyKind strategy = StrategyKind::FirstFit;
  std::uint64_t strategy_seed = 1;
  double warmup_fraction = 0.05;
  std::size_t checkpoint_interval = 1000;

  void validate() const {
    traffic.validate();
    ep.validate();
    if (wavelengths < 1 || wavelengths > kMaxWavelengths) {
      throw ConfigError("wavelengths per link (W) must be in [1, " +
                        std::to_string(kMaxWavelengths) + "]");
    }
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
      throw ConfigError("warm-up fraction must be in [0, 1)");
    }
    if (checkpoint_interval == 0) throw ConfigError("checkpoint interval must be positive");
  }

  /// Same configuration with every seed derived from one run seed.
  RunConfig with_seed(std::uint64_t run_seed) const {
    RunConfig c = *this;
    c.traffic.seed = derive_seed(run_seed, 1);
    c.ep.seed = derive_seed(run_seed, 2);
    c.strategy_seed = derive_seed(run_seed, 3);
    return c;
  }
};

struct RunMetrics {
  // Requests after the warm-up window.
  std::uint64_t offered = 0;
  std::uint64_t accepted = 0;
  std::uint64_t blocked = 0;
  double blocking_probability = 0.0;
  // Every request, warm-up included.
  std::uint64_t offered_all = 0;
  std::uint64_t blocked_all = 0;
  double blocking_probability_all = 0.0;

  double mean_execution_time_ms = 0.0;  // over all requests
  double mean_work_units = 0.0;
  std::uint64_t total_fitness_evaluations = 0;
  std::uint64_t relaxations = 0;
  std::uint64_t degenerate_mutations = 0;
  std::uint64_t checkpoints = 0;
  double first_arrival_time = 0.0;
  // Fraction of measured requests whose survivor was infeasible after each generation.
  std::vector<double> per_generation_blocking;
};

// Hooks for tests and diagnostics; the database is the live one.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void before_route(const LightpathRequest&, const WavelengthDatabase&) {}
  virtual void after_route(const LightpathRequest&, const RouteDecision&, const WavelengthDatabase&) {}
};

namespace detail {

inline void check_constraints(const WavelengthDatabase& db, const Topology& t, double at) {
  const auto violations = validate_constraints(db, t);
  if (!violations.empty()) {
    std::string msg = "constraint violation at t=" + format_number(at) + ": " +
                      to_string(violations.front().kind) + " (" + violations.front().detail + ")";
    if (violations.size() > 1) msg += " and " + std::to_string(violations.size() - 1) + " more";
    throw InvariantError(msg);
  }
}

}  // namespace detail

namespace detail {

// Core loop. `next_request` yields requests in non-decreasing arrival order.
template <typename NextRequest>
RunMetrics simulate(const Topology& t, const RunConfig& cfg, std::size_t total_requests,
                    NextRequest&& next_request, Clock clock, SimObserver* observer) {
  cfg.validate();
  WavelengthDatabase db(t.link_count(), cfg.wavelengths);
  EpRouter router(t, cfg.ep, AssignmentStrategy::make(cfg.strategy, cfg.strategy_seed), std::move(clock));

  const auto warmup = static_cast<std::uint64_t>(
      std::floor(cfg.warmup_fraction * static_cast<double>(total_requests)));
  RunMetrics m;
  m.per_generation_blocking.assign(static_cast<std::size_t>(cfg.ep.generations), 0.0);
  std::vector<std::uint64_t> gen_blocked(static_cast<std::size_t>(cfg.ep.generations), 0);

  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> queue;
  // Only the next arrival is queued; the source supplies the rest lazily.
  std::optional<LightpathRequest> pending;
  std::uint64_t arrivals = 0;
  double last_arrival = 0.0;
  auto pull_arrival = [&] {
    pending = next_request();
    if (!pending) return;
    if (pending->arrival_time < last_arrival) throw ConfigError("requests are not in arrival order");
    last_arrival = pending->arrival_time;
    queue.push({pending->arrival_time, EventKind::Arrival, arrivals++});
  };
  pull_arrival();
  if (pending) m.first_arrival_time = pending->arrival_time;

  double total_elapsed = 0.0;
  double total_work = 0.0;
  std::uint64_t events = 0;
  double now = 0.0;

  while (!queue.empty()) {
    const SimEvent ev = queue.top();
    queue.pop();
    now = ev.time;
    if (ev.kind == EventKind::Teardown) {
      db.release(ev.id);
    } else {
      const LightpathRequest req = *pending;
      const std::uint64_t index = ev.id;
      pull_arrival();
      if (observer) observer->before_route(req, db);
      const RouteDecision d = router.route_request(req, db);
      if (observer) observer->after_route(req, d, db);

      const bool measured = index >= warmup;
      ++m.offered_all;
      total_elapsed += d.elapsed;
      total_work += static_cast<double>(d.work_units);
      m.total_fitness_evaluations += d.fitness_evaluations;
      m.relaxations += static_cast<std::uint64_t>(d.relaxations);
      m.degenerate_mutations += static_cast<std::uint64_t>(d.degenerate_mutations);
      if (measured) {
        ++m.offered;
        for (std::size_t g = 0; g < d.survivor_fitness.size(); ++g) {
          if (!(d.survivor_fitness[g] > 0.0)) ++gen_blocked[g];
        }
      }
      if (d.accepted) {
        if (measured) ++m.accepted;
        queue.push({req.arrival_time + req.holding_time, EventKind::Teardown, req.id});
      } else {
        ++m.blocked_all;
        if (measured) ++m.blocked;
      }
    }
    if (++events % cfg.checkpoint_interval == 0) {
      check_constraints(db, t, now);
      ++m.checkpoints;
    }
  }

  check_constraints(db, t, now);
  ++m.checkpoints;
  if (!db.all_free()) throw InvariantError("wavelength database did not drain after the last teardown");
  if (m.offered != m.accepted + m.blocked) throw InvariantError("offered != accepted + blocked");

  if (m.offered > 0) {
    m.blocking_probability = static_cast<double>(m.blocked) / static_cast<double>(m.offered);
    for (std::size_t g = 0; g < gen_blocked.size(); ++g) {
      m.per_generation_blocking[g] =
          static_cast<double>(gen_blocked[g]) / static_cast<double>(m.offered);
    }
  }
  if (m.offered_all > 0) {
    const auto n = static_cast<double>(m.offered_all);
    m.blocking_probability_all = static_cast<double>(m.blocked_all) / n;
    m.mean_execution_time_ms = total_elapsed * 1e3 / n;
    m.mean_work_units = total_work / n;
  }
  return m;
}

}  // namespace detail

// One loss-system simulation: every arrival is routed against the live
// database, accepted lightpaths are torn down after their holding time and
// blocked requests are dropped. Constraints are validated every
// checkpoint_interval events and the database must drain to all-free.
inline RunMetrics run(const Topology& t, const RunConfig& cfg, Clock clock = steady_seconds,
                      SimObserver* observer = nullptr) {
  cfg.validate();
  RequestStream stream(cfg.traffic, t.node_count());
  auto next = [&]() -> std::optional<LightpathRequest> {
    if (stream.done()) return std::nullopt;
    return stream.next();
  };
  return detail::simulate(t, cfg, cfg.traffic.request_count, next, std::move(clock), observer);
}

/// Same as run() over an explicit request list (ids must be unique).
inline RunMetrics run_trace(const Topology& t, const RunConfig& cfg,
                            std::span<const LightpathRequest> requests,
                            Clock clock = steady_seconds, SimObserver* observer = nullptr) {
  std::size_t i = 0;
  auto next = [&]() -> std::optional<LightpathRequest> {
    if (i == requests.size()) return std::nullopt;
    return requests[i++];
  };
  return detail::simulate(t, cfg, requests.size(), next, std::move(clock), observer);
}

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
};

inline MetricSummary summarize(std::span<const double> xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

/// sqrt((s1^2 + s2^2) / 2): the spread used for "within one pooled std" comparisons.
inline double pooled_std(const MetricSummary& a, const MetricSummary& b) {
  return std::sqrt((a.std * a.std + b.std * b.std) / 2.0);
}

struct Aggregate {
  std::vector<RunMetrics> runs;
  MetricSummary blocking_probability;
  MetricSummary blocking_probability_all;
  MetricSummary mean_execution_time_ms;
  MetricSummary mean_work_units;
  MetricSummary total_fitness_evaluations;
};

inline Aggregate aggregate(std::vector<RunMetrics> runs) {
  Aggregate a;
  auto field = [&](auto get) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(static_cast<double>(get(r)));
    return summarize(xs);
  };
  a.blocking_probability = field([](const RunMetrics& r) { return r.blocking_probability; });
  a.blocking_probability_all = field([](const RunMetrics& r) { return r.blocking_probability_all; });
  a.mean_execution_time_ms = field([](const RunMetrics& r) { return r.mean_execution_time_ms; });
  a.mean_work_units = field([](const RunMetrics& r) { return r.mean_work_units; });
  a.total_fitness_evaluations = field([](const RunMetrics& r) { return r.total_fitness_evaluations; });
  a.runs = std::move(runs);
  return a;
}

// Replication i runs with seed base_seed + i. Runs may execute on several
// threads; results are collected by index, so the aggregate does not depend
// on the thread count.
inline Aggregate replicate(const Topology& t, const RunConfig& cfg, int replications,
                           std::uint64_t base_seed, unsigned threads = 1,
                           const Clock& clock = steady_seconds) {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  cfg.validate();
  std::vector<RunMetrics> results(static_cast<std::size_t>(replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (int i = next++; i < replications; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] =
            run(t, cfg.with_seed(base_seed + static_cast<std::uint64_t>(i)), clock);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::clamp(threads, 1U, static_cast<unsigned>(replications));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(std::move(results));
}

/// One replicated experiment per G value, all sharing the same seeds.
inline std::vector<Aggregate> sweep_generations(const Topology& t, const RunConfig& cfg,
                                                std::span<const int> generation_values,
                                                int replications, std::uint64_t base_seed,
                                                unsigned threads = 1) {
  if (generation_values.empty()) throw ConfigError("generation sweep needs at least one value");
  std::vector<Aggregate> out;
  for (int g : generation_values) {
    RunConfig c = cfg;
    c.ep.generations = g;
    out.push_back(replicate(t, c, replications, base_seed, threads));
  }
  return out;
}

}  // namespace drwa
