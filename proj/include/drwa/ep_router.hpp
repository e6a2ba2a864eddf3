#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drwa/core.hpp"
#include "drwa/topology.hpp"
#include "drwa/traffic.hpp"
#include "drwa/wavelength.hpp"

namespace drwa {

// Logical: setup time and execution time are counted in work units (node
// expansions plus link-wavelength availability checks) times seconds_per_unit, and
// search thresholds are walk budgets. Runs are bit-reproducible.
// WallClock: setup and execution times come from the injected clock, and the
// search thresholds are the time limits init_threshold_s / mutation_threshold_s.
enum class TimingMode { Logical, WallClock };

struct EpConfig {
  int generations = 8;
  int offspring = 15;
  int hop_bound = 4;
  int init_budget = 200;      // walks allowed per hop bound while initializing
  int mutation_budget = 200;  // walks allowed per hop bound while mutating
  TimingMode timing = TimingMode::Logical;
  double init_threshold_s = 0.5;
  double mutation_threshold_s = 1.5;
  double seconds_per_unit = 1e-6;
  std::uint64_t seed = 1;

  void validate() const {
    if (generations < 1) throw ConfigError("generations (G) must be >= 1");
    if (offspring < 1) throw ConfigError("offspring (C) must be >= 1");
    if (hop_bound < 1) throw ConfigError("hop bound must be >= 1");
    if (init_budget < 1) throw ConfigError("init budget (A1) must be >= 1");
    if (mutation_budget < 1) throw ConfigError("mutation budget (A2) must be >= 1");
    if (!(seconds_per_unit > 0.0)) throw ConfigError("seconds per work unit must be positive");
    if (!(init_threshold_s > 0.0) || !(mutation_threshold_s > 0.0)) {
      throw ConfigError("wall-clock thresholds must be positive");
    }
  }

  std::uint64_t evaluations_per_request() const {
    return 1 + static_cast<std::uint64_t>(generations) * static_cast<std::uint64_t>(offspring);
  }
};

// A candidate route S..D with the cached terms of its fitness.
struct Chromosome {
  std::vector<NodeId> genes;
  std::vector<LinkId> links;
  double cost_sum = 0.0;
  double setup_effort = 0.0;  // node expansions spent building it
  double setup_time = 0.0;    // T_x in seconds
  int free_factor = 0;        // W_x
  std::optional<Wavelength> wavelength;
  double fitness = 0.0;

  std::size_t length() const { return genes.size(); }
  int hop_count() const { return static_cast<int>(genes.size()) - 1; }
  NodeId source() const { return genes.front(); }
  NodeId destination() const { return genes.back(); }
};

/// f = W/cost + W/hops + W/T.
inline double fitness_value(int free_factor, double cost_sum, int hop_count, double setup_time) {
  if (free_factor == 0) return 0.0;
  const double w = free_factor;
  return w / cost_sum + w / hop_count + w / setup_time;
}

/// Index of the fittest chromosome; ties go to lower cost, then fewer hops,
/// then the earlier position. The parent sits at 0 and is kept when nothing
/// in the pool is feasible.
inline std::size_t select(std::span<const Chromosome> pool) {
  if (pool.empty()) throw ConfigError("selection pool is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const Chromosome& a = pool[i];
    const Chromosome& b = pool[best];
    if (a.fitness != b.fitness) {
      if (a.fitness > b.fitness) best = i;
    } else if (a.cost_sum != b.cost_sum) {
      if (a.cost_sum < b.cost_sum) best = i;
    } else if (a.hop_count() < b.hop_count()) {
      best = i;
    }
  }
  return pool[best].fitness > 0.0 ? best : 0;
}

struct WalkOutcome {
  bool found = false;
  std::uint64_t expansions = 0;
  std::uint64_t walks = 0;
};

// Randomized forward walks that never revisit a node. Holds scratch state so
// repeated searches do not allocate.
class PathWalker {
 public:
  explicit PathWalker(const Topology& t) : topo_(&t), stamp_(t.node_count(), 0) {}

  // `path` holds a loop-free prefix ending at the walk's start node. Each walk
  // extends it one uniformly chosen unvisited neighbor at a time, failing on a
  // dead end or when the path would exceed max_hops links. On success `path`
  // ends at `to`; on failure it is restored to the prefix.
  template <typename KeepGoing>
  WalkOutcome search(std::vector<NodeId>& path, NodeId to, int max_hops, Rng& rng,
                     KeepGoing&& keep_going) {
    WalkOutcome out;
    const std::size_t prefix = path.size();
    const auto limit = static_cast<std::size_t>(max_hops) + 1;  // genes allowed
    if (prefix == 0 || prefix >= limit) return out;

    while (keep_going(out.walks)) {
      ++out.walks;
      path.resize(prefix);
      ++epoch_;
      for (NodeId n : path) stamp_[n.index] = epoch_;

      for (;;) {
        if (path.size() >= limit) break;
        const NodeId cur = path.back();
        candidates_.clear();
        for (const Adjacent& a : topo_->neighbors(cur)) {
          if (stamp_[a.node.index] != epoch_) candidates_.push_back(a.node);
        }
        ++out.expansions;
        if (candidates_.empty()) break;
        const NodeId next = candidates_[uniform_below(rng, candidates_.size())];
        path.push_back(next);
        stamp_[next.index] = epoch_;
        if (next == to) {
          out.found = true;
          return out;
        }
      }
    }
    path.resize(prefix);
    return out;
  }

  WalkOutcome search(std::vector<NodeId>& path, NodeId to, int max_hops, Rng& rng, int budget) {
    return search(path, to, max_hops, rng,
                  [budget](std::uint64_t walks) { return walks < static_cast<std::uint64_t>(budget); });
  }

 private:
  const Topology* topo_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t epoch_ = 0;
  std::vector<NodeId> candidates_;
};

struct PathSearch {
  std::optional<std::vector<NodeId>> path;
  std::uint64_t expansions = 0;
  std::uint64_t walks = 0;
};

/// Up to `budget` random walks for a loop-free S..D path of at most hop_bound links.
inline PathSearch random_path(const Topology& t, NodeId source, NodeId destination, int hop_bound,
                              int budget, Rng& rng) {
  if (source == destination) throw ConfigError("source and destination must differ");
  PathWalker walker(t);
  std::vector<NodeId> path{source};
  const auto o = walker.search(path, destination, hop_bound, rng, budget);
  PathSearch r;
  r.expansions = o.expansions;
  r.walks = o.walks;
  if (o.found) r.path = std::move(path);
  return r;
}

// Per-request search state. The hop bound starts at the configured value and
// only grows when a search fails within its threshold.
struct SearchContext {
  NodeId source;
  NodeId destination;
  int hop_bound = 0;
  int relaxations = 0;
  int degenerate_mutations = 0;
};

struct Offspring {
  Chromosome chromosome;
  std::size_t kept = 0;  // leading genes copied from the parent; the locus is kept + 1
  bool relaxed = false;
  bool degenerate = false;
};

struct RouteDecision {
  bool accepted = false;
  Chromosome best;  // final survivor; carries the granted wavelength when accepted
  std::uint64_t fitness_evaluations = 0;
  int generations_run = 0;
  double elapsed = 0.0;  // seconds
  std::uint64_t work_units = 0;
  int relaxations = 0;
  int degenerate_mutations = 0;
  std::vector<double> survivor_fitness;  // after each generation
};

// Evolutionary-programming router: population of one, C offspring per
// generation by suffix-regenerating mutation, elitist selection over parent
// plus offspring, fixed number of generations.
class EpRouter {
 public:
  EpRouter(const Topology& t, EpConfig cfg, AssignmentStrategy strategy, Clock clock = steady_seconds)
      : topo_(&t), cfg_(cfg), strategy_(strategy), clock_(std::move(clock)), rng_(cfg.seed),
        walker_(t) {
    cfg_.validate();
    if (!clock_) clock_ = steady_seconds;
  }

  const EpConfig& config() const { return cfg_; }
  const Topology& topology() const { return *topo_; }
  AssignmentStrategy& strategy() { return strategy_; }
  Rng& rng() { return rng_; }
  std::uint64_t fitness_evaluations() const { return evaluations_; }
  std::uint64_t work_units() const { return work_; }

  SearchContext begin(NodeId source, NodeId destination) const {
    if (source == destination) throw ConfigError("source and destination must differ");
    if (source.index >= topo_->node_count() || destination.index >= topo_->node_count()) {
      throw ConfigError("request endpoint outside the topology");
    }
    return {source, destination, cfg_.hop_bound, 0, 0};
  }

  /// The founding individual. Relaxes the hop bound by one after every failed
  /// threshold until a path is found.
  Chromosome initialize(SearchContext& ctx) {
    Chromosome x;
    const double t0 = clock_now();
    const int max_bound = max_hop_bound();
    std::vector<NodeId>& path = x.genes;
    path.assign(1, ctx.source);
    int rounds_at_max = 0;
    for (;;) {
      const auto o = walker_.search(path, ctx.destination, ctx.hop_bound, rng_,
                                    keep_going(cfg_.init_budget, cfg_.init_threshold_s));
      x.setup_effort += static_cast<double>(o.expansions);
      work_ += o.expansions;
      if (o.found) break;
      if (ctx.hop_bound < max_bound) {
        ++ctx.hop_bound;
        ++ctx.relaxations;
      } else if (++rounds_at_max > kMaxRoundsAtFullBound) {
        throw InvariantError("no path found from " + std::to_string(ctx.source.index) + " to " +
                             std::to_string(ctx.destination.index));
      }
    }
    finish_structure(x);
    x.setup_time = setup_time_for(x.setup_effort, clock_now() - t0);
    return x;
  }

  Offspring mutate(const Chromosome& parent, SearchContext& ctx) {
    Offspring out;
    mutate_into(parent, ctx, out);
    return out;
  }

  // Flips the gene at a random interior locus m: genes before m are kept and
  // m..D is regrown by random walk around the kept nodes. A two-gene parent has
  // no interior locus and is regrown from S. If the bound cannot be met even at
  // N-1 hops, the offspring is a copy of the parent.
  void mutate_into(const Chromosome& parent, SearchContext& ctx, Offspring& out) {
    const std::size_t k = parent.genes.size();
    const std::size_t kept = k == 2 ? 1 : 1 + uniform_below(rng_, k - 2);
    Chromosome& x = out.chromosome;
    out.kept = kept;
    out.relaxed = false;
    out.degenerate = false;
    x.genes.assign(parent.genes.begin(), parent.genes.begin() + static_cast<std::ptrdiff_t>(kept));
    x.wavelength.reset();
    x.free_factor = 0;
    x.fitness = 0.0;

    const double t0 = clock_now();
    const double share = static_cast<double>(kept - 1) / static_cast<double>(k - 1);
    double suffix_effort = 0.0;
    const int used_hops = static_cast<int>(kept) - 1;
    const int max_bound = max_hop_bound();
    bool found = false;
    for (;;) {
      if (used_hops < ctx.hop_bound) {
        const auto o = walker_.search(x.genes, ctx.destination, ctx.hop_bound, rng_,
                                      keep_going(cfg_.mutation_budget, cfg_.mutation_threshold_s));
        suffix_effort += static_cast<double>(o.expansions);
        work_ += o.expansions;
        if (o.found) {
          found = true;
          break;
        }
      }
      if (ctx.hop_bound >= max_bound) break;
      ++ctx.hop_bound;
      ++ctx.relaxations;
      out.relaxed = true;
    }

    if (!found) {
      ++ctx.degenerate_mutations;
      out.degenerate = true;
      x = parent;
      x.wavelength.reset();
      x.free_factor = 0;
      x.fitness = 0.0;
      return;
    }
    finish_structure(x);
    x.setup_effort = parent.setup_effort * share + suffix_effort;
    const double wall = parent.setup_time * share + (clock_now() - t0);
    x.setup_time = setup_time_for(x.setup_effort, wall);
  }

  /// Sets W_x, the previewed wavelength and f_x. Rule state is not advanced.
  void evaluate_fitness(Chromosome& x, const WavelengthDatabase& db) {
    const auto pick = strategy_.probe(db, x.links);
    work_ += static_cast<std::uint64_t>(pick.examined);
    ++evaluations_;
    x.wavelength = pick.wavelength;
    x.free_factor = pick.wavelength ? 1 : 0;
    x.fitness = fitness_value(x.free_factor, x.cost_sum, x.hop_count(), x.setup_time);
  }

  /// Full search for one request. On acceptance the lightpath is reserved in db.
  RouteDecision route_request(const LightpathRequest& req, WavelengthDatabase& db) {
    RouteDecision d;
    const double t0 = clock_now();
    const std::uint64_t work0 = work_;
    const std::uint64_t evals0 = evaluations_;

    SearchContext ctx = begin(req.source, req.destination);
    Chromosome parent = initialize(ctx);
    evaluate_fitness(parent, db);

    const auto pool_size = static_cast<std::size_t>(cfg_.offspring) + 1;
    if (pool_.size() != pool_size) pool_.assign(pool_size, Chromosome{});
    d.survivor_fitness.reserve(static_cast<std::size_t>(cfg_.generations));
    for (int g = 0; g < cfg_.generations; ++g) {
      pool_[0] = parent;
      for (std::size_t c = 1; c < pool_size; ++c) {
        scratch_.chromosome = std::move(pool_[c]);
        mutate_into(parent, ctx, scratch_);
        pool_[c] = std::move(scratch_.chromosome);
        evaluate_fitness(pool_[c], db);
      }
      parent = pool_[select(pool_)];
      d.survivor_fitness.push_back(parent.fitness);
      ++d.generations_run;
    }

    if (parent.free_factor == 1) {
      const auto granted = strategy_.grant(db, db.free_mask(parent.links));
      if (!granted || granted != parent.wavelength) {
        throw InvariantError("wavelength grant disagrees with the evaluated choice");
      }
      ActiveLightpath lp;
      lp.request_id = req.id;
      lp.source = req.source;
      lp.destination = req.destination;
      lp.link_ids = parent.links;
      lp.wavelength = *granted;
      lp.teardown_time = req.arrival_time + req.holding_time;
      db.reserve(std::move(lp));
      d.accepted = true;
    }

    d.best = std::move(parent);
    d.fitness_evaluations = evaluations_ - evals0;
    d.work_units = work_ - work0;
    d.relaxations = ctx.relaxations;
    d.degenerate_mutations = ctx.degenerate_mutations;
    d.elapsed = cfg_.timing == TimingMode::Logical
                    ? static_cast<double>(d.work_units) * cfg_.seconds_per_unit
                    : clock_() - t0;
    return d;
  }

 private:
  static constexpr int kMaxRoundsAtFullBound = 100000;

  // Search threshold: a walk budget, or a deadline in wall-clock mode.
  struct KeepGoing {
    const EpRouter* router;
    int budget;
    double deadline;
    bool operator()(std::uint64_t walks) const {
      if (router->cfg_.timing == TimingMode::Logical) return walks < static_cast<std::uint64_t>(budget);
      return walks == 0 || router->clock_() < deadline;
    }
  };

  KeepGoing keep_going(int budget, double threshold_s) const {
    return {this, budget, clock_now() + threshold_s};
  }

  int max_hop_bound() const {
    return std::max(static_cast<int>(topo_->node_count()) - 1, cfg_.hop_bound);
  }

  double clock_now() const { return cfg_.timing == TimingMode::WallClock ? clock_() : 0.0; }


  double setup_time_for(double effort, double wall_seconds) const {
    if (cfg_.timing == TimingMode::Logical) return std::max(effort, 1.0) * cfg_.seconds_per_unit;
    return std::max(wall_seconds, 1e-9);
  }

  void finish_structure(Chromosome& x) const {
    x.links.clear();
    x.cost_sum = 0.0;
    for (std::size_t i = 1; i < x.genes.size(); ++i) {
      const auto l = topo_->link_between(x.genes[i - 1], x.genes[i]);
      if (!l) throw InvariantError("chromosome contains non-adjacent genes");
      x.links.push_back(*l);
      x.cost_sum += topo_->link(*l).cost;
    }
  }

  const Topology* topo_;
  EpConfig cfg_;
  AssignmentStrategy strategy_;
  Clock clock_;
  Rng rng_;
  PathWalker walker_;
  std::uint64_t evaluations_ = 0;
  std::uint64_t work_ = 0;
  std::vector<Chromosome> pool_;
  Offspring scratch_;
};

}  // namespace drwa
