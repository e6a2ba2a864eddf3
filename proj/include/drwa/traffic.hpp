#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "drwa/core.hpp"
#include "drwa/topology.hpp"

namespace drwa {

/// Mean of a Pareto(shape, location) variable, shape·location/(shape−1).
inline double pareto_mean(double shape, double location) {
  if (!(shape > 1.0)) throw ConfigError("Pareto shape must exceed 1 for a finite mean");
  if (!(location > 0.0)) throw ConfigError("Pareto location must be positive");
  return shape * location / (shape - 1.0);
}

/// Shape that gives a Pareto variable with the requested mean at a fixed location.
inline double solve_pareto_shape_for_mean(double target_mean, double location) {
  if (!(location > 0.0)) throw ConfigError("Pareto location must be positive");
  if (!(target_mean > location)) {
    throw ConfigError("Pareto mean " + format_number(target_mean) +
                      " must exceed the location " + format_number(location));
  }
  return target_mean / (target_mean - location);
}

/// Offered load in Erlang.
inline double erlang_load(double arrival_rate, double mean_holding) {
  return arrival_rate * mean_holding;
}

struct ExponentialHolding {
  double mean = 10.0;
};

struct ParetoHolding {
  double shape = 1.2;
  double location = 1.0;
};

class HoldingModel {
 public:
  HoldingModel() = default;

  static HoldingModel exponential(double mean) {
    if (!(mean > 0.0)) throw ConfigError("exponential holding mean must be positive");
    return HoldingModel(ExponentialHolding{mean});
  }

  static HoldingModel pareto(double shape, double location) {
    pareto_mean(shape, location);  // validates
    return HoldingModel(ParetoHolding{shape, location});
  }

  bool is_pareto() const { return std::holds_alternative<ParetoHolding>(model_); }
  const std::variant<ExponentialHolding, ParetoHolding>& model() const { return model_; }

  double mean() const {
    if (auto* p = std::get_if<ParetoHolding>(&model_)) return pareto_mean(p->shape, p->location);
    return std::get<ExponentialHolding>(model_).mean;
  }

  // Exponential: -mean·ln U with U on (0,1).
  // Pareto: inverse transform location·U^(-1/shape) with U on (0,1].
  double sample(Rng& rng) const {
    if (auto* p = std::get_if<ParetoHolding>(&model_)) {
      return p->location * std::pow(uniform_half_open(rng), -1.0 / p->shape);
    }
    return -std::get<ExponentialHolding>(model_).mean * std::log(uniform_open(rng));
  }

  std::string describe() const {
    if (auto* p = std::get_if<ParetoHolding>(&model_)) {
      return "pareto(" + format_number(p->shape) + "," + format_number(p->location) + ")";
    }
    return "exponential(" + format_number(std::get<ExponentialHolding>(model_).mean) + ")";
  }

 private:
  explicit HoldingModel(std::variant<ExponentialHolding, ParetoHolding> m) : model_(m) {}

  std::variant<ExponentialHolding, ParetoHolding> model_{ExponentialHolding{}};
};

struct TrafficConfig {
  double arrival_rate = 6.0;
  HoldingModel holding = HoldingModel::exponential(10.0);
  std::size_t request_count = 100000;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(arrival_rate > 0.0)) throw ConfigError("arrival rate must be positive");
  }

  double offered_load() const { return erlang_load(arrival_rate, holding.mean()); }
};

struct LightpathRequest {
  RequestId id = 0;
  NodeId source;
  NodeId destination;
  double arrival_time = 0.0;
  double holding_time = 0.0;
};

// Poisson arrivals, uniform ordered (S, D) pairs with S != D, i.i.d. holding
// times. Draw order per request is fixed (gap, S, D, holding) so a stream is a
// pure function of the seed.
class RequestStream {
 public:
  RequestStream(const TrafficConfig& cfg, std::size_t node_count)
      : cfg_(cfg), node_count_(node_count), rng_(cfg.seed) {
    cfg_.validate();
    if (node_count_ < 2) throw ConfigError("traffic needs at least 2 nodes");
  }

  bool done() const { return next_id_ >= cfg_.request_count; }
  std::size_t remaining() const { return cfg_.request_count - next_id_; }

  LightpathRequest next() {
    LightpathRequest r;
    r.id = next_id_++;
    clock_ += -std::log(uniform_open(rng_)) / cfg_.arrival_rate;
    r.arrival_time = clock_;
    const auto s = uniform_below(rng_, node_count_);
    auto d = uniform_below(rng_, node_count_ - 1);
    if (d >= s) ++d;
    r.source = NodeId{s};
    r.destination = NodeId{d};
    r.holding_time = cfg_.holding.sample(rng_);
    return r;
  }

 private:
  TrafficConfig cfg_;
  std::size_t node_count_;
  Rng rng_;
  RequestId next_id_ = 0;
  double clock_ = 0.0;
};

inline std::vector<LightpathRequest> generate_requests(const TrafficConfig& cfg, const Topology& t) {
  RequestStream stream(cfg, t.node_count());
  std::vector<LightpathRequest> out;
  out.reserve(cfg.request_count);
  while (!stream.done()) out.push_back(stream.next());
  return out;
}

}  // namespace drwa
