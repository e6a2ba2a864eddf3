// Command-line front end: one experiment per invocation, CSV out.
//
// Exit status: 0 success, 1 usage error, 2 runtime failure (I/O or a
// simulation invariant breach).

#include <fstream>
#include <iostream>

#include "drwa/cli.hpp"

int main(int argc, char** argv) {
  drwa::ExperimentConfig cfg;
  try {
    cfg = drwa::parse_config(argc, argv);
  } catch (const drwa::HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "drwa_sim: " << e.what() << "\n";
    return 1;
  }

  try {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.output != "-") {
      file.open(cfg.output);
      if (!file) throw drwa::Error("cannot open output file '" + cfg.output + "'");
      out = &file;
    }
    const auto points = drwa::run_experiment(cfg, *out);
    out->flush();
    if (!*out) throw drwa::Error("write to '" + cfg.output + "' failed");

    std::cerr << "warm-up: first " << drwa::format_number(cfg.warmup * 100)
              << "% of requests excluded from blocking_probability\n";
    for (const auto& p : points) {
      std::cerr << drwa::to_string(p.config.strategy) << " W=" << p.config.wavelengths
                << " load=" << drwa::format_number(p.config.load) << " G=" << p.config.generations
                << ": blocking " << drwa::format_number(p.aggregate.blocking_probability.mean)
                << " (all requests " << drwa::format_number(p.aggregate.blocking_probability_all.mean)
                << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "drwa_sim: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
