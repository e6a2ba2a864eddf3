#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "drwa/core.hpp"
#include "drwa/ep_router.hpp"
#include "drwa/sim_engine.hpp"
#include "drwa/topology.hpp"
#include "drwa/traffic.hpp"
#include "drwa/wavelength.hpp"

namespace drwa {

// Holding-time family as written on the command line and in CSV rows:
//   exponential                mean from mean_holding
//   pareto:<shape>:<location>  mean implied by the parameters
//   pareto-matched:<location>  shape solved so the mean equals mean_holding
struct HoldingSpec {
  enum class Kind { Exponential, Pareto, ParetoMatched };
  Kind kind = Kind::Exponential;
  double shape = 1.2;
  double location = 1.0;

  static HoldingSpec exponential() { return {}; }
  static HoldingSpec pareto(double shape, double location) { return {Kind::Pareto, shape, location}; }
  static HoldingSpec pareto_matched(double location) { return {Kind::ParetoMatched, 0.0, location}; }

  std::string to_string() const {
    switch (kind) {
      case Kind::Exponential: return "exponential";
      case Kind::Pareto: return "pareto:" + format_number(shape) + ":" + format_number(location);
      case Kind::ParetoMatched: return "pareto-matched:" + format_number(location);
    }
    return "?";
  }

  // Also accepts the call form pareto(1.2,1) / pareto-matched(1.5).
  static std::optional<HoldingSpec> parse(std::string_view text) {
    std::string s(text);
    std::replace(s.begin(), s.end(), '(', ':');
    std::replace(s.begin(), s.end(), ',', ':');
    if (!s.empty() && s.back() == ')') s.pop_back();
    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
      const auto colon = s.find(':', start);
      parts.push_back(s.substr(start, colon - start));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    auto num = [](const std::string& p) -> std::optional<double> {
      double v = 0.0;
      auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
      if (ec != std::errc{} || end != p.data() + p.size()) return std::nullopt;
      return v;
    };
    if (parts[0] == "exponential" && parts.size() == 1) return exponential();
    if (parts[0] == "pareto" && parts.size() == 3) {
      auto a = num(parts[1]);
      auto b = num(parts[2]);
      if (a && b) return pareto(*a, *b);
    }
    if (parts[0] == "pareto-matched" && parts.size() == 2) {
      if (auto b = num(parts[1])) return pareto_matched(*b);
    }
    return std::nullopt;
  }

  bool operator==(const HoldingSpec&) const = default;
};

enum class SweepParameter { Generations, Wavelengths, Load };

inline std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Generations: return "generations";
    case SweepParameter::Wavelengths: return "wavelengths";
    case SweepParameter::Load: return "load";
  }
  return "?";
}

struct Sweep {
  SweepParameter parameter = SweepParameter::Generations;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string topology = "nsf14";  // "nsf14" or a topology file path
  int wavelengths = 8;
  double load = 60.0;  // Erlang
  double mean_holding = 10.0;
  HoldingSpec holding;
  StrategyKind strategy = StrategyKind::FirstFit;
  std::size_t requests = 100000;
  int generations = 8;
  int offspring = 15;
  int hop_bound = 4;
  int init_budget = 200;
  int mutation_budget = 200;
  int replications = 10;
  std::uint64_t base_seed = 1;
  double warmup = 0.05;
  std::string output = "-";
  TimingMode timing = TimingMode::Logical;
  unsigned threads = 0;  // 0: one per hardware thread
  std::optional<Sweep> sweep;
  bool compare_strategies = false;
  bool extended_metrics = false;

  /// Mean holding time actually simulated (explicit Pareto parameters fix it).
  double effective_mean_holding() const {
    if (holding.kind == HoldingSpec::Kind::Pareto) return pareto_mean(holding.shape, holding.location);
    return mean_holding;
  }

  double arrival_rate() const { return load / effective_mean_holding(); }

  HoldingModel holding_model() const {
    switch (holding.kind) {
      case HoldingSpec::Kind::Exponential: return HoldingModel::exponential(mean_holding);
      case HoldingSpec::Kind::Pareto: return HoldingModel::pareto(holding.shape, holding.location);
      case HoldingSpec::Kind::ParetoMatched:
        return HoldingModel::pareto(solve_pareto_shape_for_mean(mean_holding, holding.location),
                                    holding.location);
    }
    return HoldingModel::exponential(mean_holding);
  }

  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw ConfigError(what);
    };
    require(wavelengths >= 1 && wavelengths <= kMaxWavelengths,
            "wavelengths (W) must be in [1, " + std::to_string(kMaxWavelengths) + "], got " +
                std::to_string(wavelengths));
    require(load > 0.0 && std::isfinite(load), "load must be positive");
    require(mean_holding > 0.0 && std::isfinite(mean_holding), "mean-holding must be positive");
    require(requests >= 1, "requests must be >= 1");
    require(generations >= 1, "generations (G) must be >= 1");
    require(offspring >= 1, "offspring (C) must be >= 1");
    require(hop_bound >= 1, "hop-bound must be >= 1");
    require(init_budget >= 1, "init-budget (A1) must be >= 1");
    require(mutation_budget >= 1, "mutation-budget (A2) must be >= 1");
    require(replications >= 1, "replications must be >= 1");
    require(warmup >= 0.0 && warmup < 1.0, "warmup must be in [0, 1)");
    try {
      holding_model();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("holding: ") + e.what());
    }
    if (sweep) {
      require(!sweep->values.empty(), "sweep needs at least one value");
      for (double v : sweep->values) {
        ExperimentConfig point = *this;
        point.sweep.reset();
        point.apply(sweep->parameter, v);
        point.validate();
      }
    }
  }

  void apply(SweepParameter p, double value) {
    switch (p) {
      case SweepParameter::Generations: generations = static_cast<int>(value); break;
      case SweepParameter::Wavelengths: wavelengths = static_cast<int>(value); break;
      case SweepParameter::Load: load = value; break;
    }
  }

  RunConfig run_config() const {
    RunConfig rc;
    rc.traffic.arrival_rate = arrival_rate();
    rc.traffic.holding = holding_model();
    rc.traffic.request_count = requests;
    rc.ep.generations = generations;
    rc.ep.offspring = offspring;
    rc.ep.hop_bound = hop_bound;
    rc.ep.init_budget = init_budget;
    rc.ep.mutation_budget = mutation_budget;
    rc.ep.timing = timing;
    rc.wavelengths = wavelengths;
    rc.strategy = strategy;
    rc.warmup_fraction = warmup;
    return rc;
  }

  unsigned worker_threads() const {
    if (threads > 0) return threads;
    return std::max(1U, std::thread::hardware_concurrency());
  }
};

inline Topology resolve_topology(const std::string& name) {
  if (name == "nsf14") return nsf14();
  return load_topology_file(name);
}

/// Config points of an experiment: sweep values, times strategies when comparing.
inline std::vector<ExperimentConfig> expand_points(const ExperimentConfig& cfg) {
  std::vector<ExperimentConfig> out;
  std::vector<StrategyKind> strategies{cfg.strategy};
  if (cfg.compare_strategies) {
    strategies = {StrategyKind::FirstFit, StrategyKind::Random, StrategyKind::RoundRobin};
  }
  std::vector<std::optional<double>> values{std::nullopt};
  if (cfg.sweep) values.assign(cfg.sweep->values.begin(), cfg.sweep->values.end());
  for (const auto& v : values) {
    for (StrategyKind s : strategies) {
      ExperimentConfig p = cfg;
      p.sweep.reset();
      p.compare_strategies = false;
      p.strategy = s;
      if (v) p.apply(cfg.sweep->parameter, *v);
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::string experiment_id(const ExperimentConfig& cfg) {
  std::string id;
  if (cfg.compare_strategies) id = "compare-strategies";
  if (cfg.sweep) {
    if (!id.empty()) id += "/";
    id += "sweep-" + to_string(cfg.sweep->parameter);
  }
  return id.empty() ? "run" : id;
}

inline constexpr std::string_view kCsvHeader =
    "experiment,topology,W,load,holding,strategy,requests,G,C,seed,metric,mean,std";

/// The config columns of a CSV row (everything before `metric`).
inline std::string csv_config_columns(const std::string& experiment, const ExperimentConfig& p) {
  return experiment + "," + p.topology + "," + std::to_string(p.wavelengths) + "," +
         format_number(p.load) + "," + p.holding.to_string() + "," + to_string(p.strategy) + "," +
         std::to_string(p.requests) + "," + std::to_string(p.generations) + "," +
         std::to_string(p.offspring) + "," + std::to_string(p.base_seed);
}

struct PointResult {
  ExperimentConfig config;
  Aggregate aggregate;
};

// Every point uses the same base seed, so traffic streams are paired across
// sweep values and strategies.
inline std::vector<PointResult> run_points(const ExperimentConfig& cfg) {
  cfg.validate();
  const Topology topo = resolve_topology(cfg.topology);
  std::vector<PointResult> out;
  for (ExperimentConfig& p : expand_points(cfg)) {
    Aggregate a = replicate(topo, p.run_config(), p.replications, p.base_seed, p.worker_threads());
    out.push_back({std::move(p), std::move(a)});
  }
  return out;
}

inline void write_csv(std::ostream& os, const ExperimentConfig& cfg,
                      const std::vector<PointResult>& points) {
  const std::string id = experiment_id(cfg);
  os << kCsvHeader << "\n";
  for (const auto& pt : points) {
    const std::string prefix = csv_config_columns(id, pt.config);
    auto row = [&](std::string_view metric, const MetricSummary& s) {
      os << prefix << "," << metric << "," << format_number(s.mean) << "," << format_number(s.std)
         << "\n";
    };
    row("blocking_probability", pt.aggregate.blocking_probability);
    row("mean_execution_time_ms", pt.aggregate.mean_execution_time_ms);
    row("total_fitness_evaluations", pt.aggregate.total_fitness_evaluations);
    if (cfg.extended_metrics) {
      row("blocking_probability_no_warmup", pt.aggregate.blocking_probability_all);
      row("mean_work_units", pt.aggregate.mean_work_units);
    }
  }
}

/// Runs every point of cfg and writes the CSV; returns the per-point results.
inline std::vector<PointResult> run_experiment(const ExperimentConfig& cfg, std::ostream& os) {
  auto points = run_points(cfg);
  write_csv(os, cfg, points);
  return points;
}

/// run_experiment over all three assignment rules with paired seeds.
inline std::vector<PointResult> compare_strategies(ExperimentConfig cfg, std::ostream& os) {
  cfg.compare_strategies = true;
  return run_experiment(cfg, os);
}

}  // namespace drwa
