#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drwa/experiment.hpp"

namespace drwa {

/// Bad flags, unknown options, or invalid values. Maps to exit status 1.
struct UsageError : Error {
  using Error::Error;
};

/// --help was given; what() holds the help text.
struct HelpRequested : Error {
  using Error::Error;
};

// "1:8" is an inclusive integer range, "4,8,12,16" a list, "60" a single value.
inline std::vector<double> parse_sweep_values(const std::string& text) {
  auto num = [&](std::string_view s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
      throw UsageError("bad sweep value '" + std::string(s) + "' in '" + text + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    const double lo = num(std::string_view(text).substr(0, colon));
    const double hi = num(std::string_view(text).substr(colon + 1));
    if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo) {
      throw UsageError("sweep range '" + text + "' must be lo:hi with integers lo <= hi");
    }
    for (double v = lo; v <= hi; v += 1.0) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(num(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<std::string> cli_args(int argc, const char* const* argv) {
  return std::vector<std::string>(argv + (argc > 0 ? 1 : 0), argv + argc);
}

// Flags override values read from --config (flat key=value, keys are the long
// flag names without dashes). Unknown flags and invalid values raise UsageError.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  CLI::App app{"Dynamic routing and wavelength assignment simulator (evolutionary-programming router)",
               "drwa_sim"};
  app.set_config("--config", "", "Read flat key=value settings from a file");
  app.get_config_formatter_base()->valueSeparator('=');
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string strategy = to_string(cfg.strategy);
  std::string holding = cfg.holding.to_string();
  std::string timing = "logical";
  std::vector<std::string> sweep;

  app.add_option("--topology", cfg.topology, "'nsf14' or a topology file path");
  app.add_option("--wavelengths,-W", cfg.wavelengths, "Wavelengths per link");
  app.add_option("--load", cfg.load, "Offered load in Erlang");
  app.add_option("--mean-holding", cfg.mean_holding, "Mean holding time");
  app.add_option("--holding", holding,
                 "exponential | pareto:<shape>:<location> | pareto-matched:<location>");
  app.add_option("--strategy", strategy, "first-fit | random | round-robin");
  app.add_option("--requests", cfg.requests, "Requests per replication");
  app.add_option("--generations,-G", cfg.generations, "EP generations per request");
  app.add_option("--offspring,-C", cfg.offspring, "Offspring per generation");
  app.add_option("--hop-bound", cfg.hop_bound, "Initial hop bound");
  app.add_option("--init-budget", cfg.init_budget, "Walks per hop bound while initializing");
  app.add_option("--mutation-budget", cfg.mutation_budget, "Walks per hop bound while mutating");
  app.add_option("--replications", cfg.replications, "Independent replications per point");
  app.add_option("--seed", cfg.base_seed, "Base seed; replication i uses seed+i");
  app.add_option("--warmup", cfg.warmup, "Fraction of early requests left out of blocking");
  app.add_option("--output,-o", cfg.output, "CSV destination, '-' for stdout");
  app.add_option("--timing", timing, "logical | wall");
  app.add_option("--threads", cfg.threads, "Worker threads for replications (0 = all cores)");
  app.add_option("--sweep", sweep, "<generations|wavelengths|load> <lo:hi | v1,v2,...>")
      ->expected(2);
  app.add_flag("--compare-strategies", cfg.compare_strategies, "Run all three assignment rules");
  app.add_flag("--extended-metrics", cfg.extended_metrics,
               "Also emit no-warm-up blocking and logical work rows");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  auto s = parse_strategy(strategy);
  if (!s) throw UsageError("strategy must be first-fit, random or round-robin, got '" + strategy + "'");
  cfg.strategy = *s;
  auto h = HoldingSpec::parse(holding);
  if (!h) throw UsageError("cannot parse holding '" + holding + "'");
  cfg.holding = *h;
  if (timing == "logical") {
    cfg.timing = TimingMode::Logical;
  } else if (timing == "wall") {
    cfg.timing = TimingMode::WallClock;
  } else {
    throw UsageError("timing must be logical or wall, got '" + timing + "'");
  }
  if (!sweep.empty()) {
    Sweep sw;
    if (sweep[0] == "generations") {
      sw.parameter = SweepParameter::Generations;
    } else if (sweep[0] == "wavelengths") {
      sw.parameter = SweepParameter::Wavelengths;
    } else if (sweep[0] == "load") {
      sw.parameter = SweepParameter::Load;
    } else {
      throw UsageError("sweep parameter must be generations, wavelengths or load");
    }
    sw.values = parse_sweep_values(sweep[1]);
    if (sw.parameter != SweepParameter::Load) {
      for (double v : sw.values) {
        if (v != std::floor(v)) throw UsageError("sweep over " + sweep[0] + " needs integers");
      }
    }
    cfg.sweep = std::move(sw);
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

inline ExperimentConfig parse_config(int argc, const char* const* argv) {
  return parse_config(cli_args(argc, argv));
}

}  // namespace drwa
