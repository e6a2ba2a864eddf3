#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drwa/core.hpp"
#include "drwa/topology.hpp"

namespace drwa {

inline constexpr int kMaxWavelengths = 64;

/// Bit w set = wavelength w. Holds at most kMaxWavelengths indices.
using WavelengthMask = std::uint64_t;

inline WavelengthMask all_wavelengths(int w) {
  return w >= 64 ? ~WavelengthMask{0} : ((WavelengthMask{1} << w) - 1);
}

inline std::vector<Wavelength> mask_to_indices(WavelengthMask mask) {
  std::vector<Wavelength> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

// An established lightpath: the links it occupies (in traversal order from
// source to destination) and its single wavelength.
struct ActiveLightpath {
  RequestId request_id = 0;
  NodeId source;
  NodeId destination;
  std::vector<LinkId> link_ids;
  Wavelength wavelength = 0;
  double teardown_time = 0.0;
};

// Centralized per-link wavelength occupancy plus the set of live lightpaths.
class WavelengthDatabase {
 public:
  WavelengthDatabase(std::size_t link_count, int wavelengths)
      : wavelengths_(wavelengths), busy_(link_count, 0) {
    if (wavelengths < 1 || wavelengths > kMaxWavelengths) {
      throw ConfigError("wavelengths per link (W) must be in [1, " +
                        std::to_string(kMaxWavelengths) + "], got " + std::to_string(wavelengths));
    }
  }

  int wavelengths() const { return wavelengths_; }
  std::size_t link_count() const { return busy_.size(); }
  WavelengthMask full_mask() const { return all_wavelengths(wavelengths_); }

  bool busy(LinkId l, Wavelength w) const { return (busy_.at(l.index) >> w) & 1U; }
  WavelengthMask busy_mask(LinkId l) const { return busy_.at(l.index); }

  /// Wavelengths idle on every listed link.
  WavelengthMask free_mask(std::span<const LinkId> links) const {
    WavelengthMask used = 0;
    for (LinkId l : links) used |= busy_[l.index];
    return full_mask() & ~used;
  }

  int rr_counter() const { return rr_counter_; }
  void set_rr_counter(int c) {
    if (c < 0 || c >= wavelengths_) throw ConfigError("round-robin counter out of range");
    rr_counter_ = c;
  }
  void advance_rr_past(Wavelength chosen) { rr_counter_ = (chosen + 1) % wavelengths_; }

  void reserve(ActiveLightpath lp) {
    if (lp.wavelength < 0 || lp.wavelength >= wavelengths_) {
      throw ConflictError("wavelength " + std::to_string(lp.wavelength) + " out of range");
    }
    if (lp.link_ids.empty()) throw ConflictError("lightpath has no links");
    if (active_.contains(lp.request_id)) {
      throw ConflictError("request " + std::to_string(lp.request_id) + " already active");
    }
    const WavelengthMask bit = WavelengthMask{1} << lp.wavelength;
    for (LinkId l : lp.link_ids) {
      if (busy_.at(l.index) & bit) {
        throw ConflictError("wavelength " + std::to_string(lp.wavelength) + " already busy on link " +
                            std::to_string(l.index));
      }
    }
    for (LinkId l : lp.link_ids) busy_[l.index] |= bit;
    active_.emplace(lp.request_id, std::move(lp));
  }

  void release(RequestId id) {
    auto it = active_.find(id);
    if (it == active_.end()) {
      throw ConflictError("release of unknown request " + std::to_string(id));
    }
    const WavelengthMask bit = WavelengthMask{1} << it->second.wavelength;
    for (LinkId l : it->second.link_ids) busy_[l.index] &= ~bit;
    active_.erase(it);
  }

  const std::map<RequestId, ActiveLightpath>& active() const { return active_; }

  bool all_free() const {
    return active_.empty() &&
           std::all_of(busy_.begin(), busy_.end(), [](WavelengthMask m) { return m == 0; });
  }

  std::span<const WavelengthMask> occupancy() const { return busy_; }

  // Test hook: mark a cell busy without an owning lightpath.
  void force_busy(LinkId l, Wavelength w) { busy_.at(l.index) |= WavelengthMask{1} << w; }

  // Test hook: register a lightpath exactly as given, skipping every check.
  void force_active(ActiveLightpath lp) {
    for (LinkId l : lp.link_ids) {
      if (l.index < busy_.size() && lp.wavelength >= 0 && lp.wavelength < wavelengths_) {
        busy_[l.index] |= WavelengthMask{1} << lp.wavelength;
      }
    }
    active_.insert_or_assign(lp.request_id, std::move(lp));
  }

 private:
  int wavelengths_;
  std::vector<WavelengthMask> busy_;
  int rr_counter_ = 0;
  std::map<RequestId, ActiveLightpath> active_;
};

inline std::vector<Wavelength> free_wavelengths_on_path(const WavelengthDatabase& db,
                                                        std::span<const LinkId> links) {
  return mask_to_indices(db.free_mask(links));
}

enum class StrategyKind { FirstFit, Random, RoundRobin };

inline std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::FirstFit: return "first-fit";
    case StrategyKind::Random: return "random";
    case StrategyKind::RoundRobin: return "round-robin";
  }
  return "?";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view s) {
  if (s == "first-fit" || s == "ff") return StrategyKind::FirstFit;
  if (s == "random") return StrategyKind::Random;
  if (s == "round-robin" || s == "rr") return StrategyKind::RoundRobin;
  return std::nullopt;
}

struct WavelengthPick {
  std::optional<Wavelength> wavelength;
  // Link-wavelength availability checks made by probe(); 0 from pick().
  int examined = 0;
};

// First-fit, random and round-robin wavelength rules.
//
// Random draws from a counter-based generator: pick() previews the draw the
// next grant would make, grant() consumes it. Round-robin reads and advances
// the database's global counter. Neither rule changes state in pick().
class AssignmentStrategy {
 public:
  static AssignmentStrategy first_fit() { return AssignmentStrategy(StrategyKind::FirstFit, 0); }
  static AssignmentStrategy round_robin() { return AssignmentStrategy(StrategyKind::RoundRobin, 0); }
  static AssignmentStrategy random(std::uint64_t seed) {
    return AssignmentStrategy(StrategyKind::Random, seed);
  }
  static AssignmentStrategy make(StrategyKind kind, std::uint64_t seed) {
    return AssignmentStrategy(kind, seed);
  }

  StrategyKind kind() const { return kind_; }
  std::uint64_t draws() const { return counter_; }

  /// The wavelength the rule would take from a free set; state is untouched.
  WavelengthPick pick(const WavelengthDatabase& db, WavelengthMask free) const {
    const int w = db.wavelengths();
    free &= db.full_mask();
    if (!free) return {};
    switch (kind_) {
      case StrategyKind::FirstFit:
        return {std::countr_zero(free), 0};
      case StrategyKind::RoundRobin: {
        const int start = db.rr_counter();
        for (int step = 0; step < w; ++step) {
          const int idx = (start + step) % w;
          if ((free >> idx) & 1U) return {idx, 0};
        }
        return {};
      }
      case StrategyKind::Random: {
        std::uint64_t c = counter_;
        const auto nth = uniform_below([&] { return splitmix64(seed_ ^ splitmix64(c++)); },
                                       static_cast<std::uint64_t>(std::popcount(free)));
        return {nth_set_bit(free, static_cast<int>(nth)), 0};
      }
    }
    return {};
  }

  // Same choice as pick(db, db.free_mask(links)), found the way a
  // per-wavelength scan of the occupancy table finds it. First-fit scans up
  // from 0 and round-robin from the counter, each stopping at the first index
  // free on every link; random must test every index to build its candidate
  // set. A test stops at the first busy link. `examined` counts the tests.
  WavelengthPick probe(const WavelengthDatabase& db, std::span<const LinkId> links) const {
    const int w = db.wavelengths();
    int examined = 0;
    auto free_on_path = [&](int idx) {
      for (LinkId l : links) {
        ++examined;
        if (db.busy(l, idx)) return false;
      }
      return true;
    };
    if (kind_ == StrategyKind::Random) {
      WavelengthMask free = 0;
      for (int idx = 0; idx < w; ++idx) {
        if (free_on_path(idx)) free |= WavelengthMask{1} << idx;
      }
      auto p = pick(db, free);
      p.examined = examined;
      return p;
    }
    const int start = kind_ == StrategyKind::RoundRobin ? db.rr_counter() : 0;
    for (int step = 0; step < w; ++step) {
      const int idx = (start + step) % w;
      if (free_on_path(idx)) return {idx, examined};
    }
    return {std::nullopt, examined};
  }

  /// Commit the choice for an established lightpath and advance rule state.
  std::optional<Wavelength> grant(WavelengthDatabase& db, WavelengthMask free) {
    const auto p = pick(db, free);
    if (!p.wavelength) return std::nullopt;
    if (kind_ == StrategyKind::RoundRobin) db.advance_rr_past(*p.wavelength);
    if (kind_ == StrategyKind::Random) {
      const auto n = static_cast<std::uint64_t>(std::popcount(free & db.full_mask()));
      uniform_below([&] { return splitmix64(seed_ ^ splitmix64(counter_++)); }, n);
    }
    return p.wavelength;
  }

 private:
  AssignmentStrategy(StrategyKind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}

  static int nth_set_bit(WavelengthMask m, int n) {
    for (int i = 0; i < n; ++i) m &= m - 1;
    return std::countr_zero(m);
  }

  StrategyKind kind_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Choose among an explicit set of free indices, advancing rule state on success.
inline std::optional<Wavelength> choose_wavelength(WavelengthDatabase& db,
                                                   AssignmentStrategy& strategy,
                                                   std::span<const Wavelength> free) {
  WavelengthMask mask = 0;
  for (Wavelength w : free) {
    if (w < 0 || w >= db.wavelengths()) throw ConfigError("free wavelength index out of range");
    mask |= WavelengthMask{1} << w;
  }
  return strategy.grant(db, mask);
}

enum class ConstraintKind {
  UniqueWavelength,     // 2(a)
  Continuity,           // 2(b)
  DistinctOnLink,       // 2(c)
  FlowConservation,     // 2(d)
  OrphanOccupancy,      // busy cell with no owning lightpath
};

inline std::string to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::UniqueWavelength: return "2a-unique-wavelength";
    case ConstraintKind::Continuity: return "2b-continuity";
    case ConstraintKind::DistinctOnLink: return "2c-distinct-on-link";
    case ConstraintKind::FlowConservation: return "2d-flow-conservation";
    case ConstraintKind::OrphanOccupancy: return "orphan-occupancy";
  }
  return "?";
}

struct ConstraintViolation {
  ConstraintKind kind;
  RequestId request_id = 0;
  std::string detail;
};

// Re-derives the lightpath indicator variables from the active set and checks
// them against the occupancy table. Violations are returned, never thrown.
inline std::vector<ConstraintViolation> validate_constraints(const WavelengthDatabase& db,
                                                             const Topology& t) {
  std::vector<ConstraintViolation> out;
  const int W = db.wavelengths();
  const std::size_t L = db.link_count();
  // Owner count per (link, wavelength).
  std::vector<std::uint32_t> owners(L * static_cast<std::size_t>(W), 0);

  for (const auto& [id, lp] : db.active()) {
    // 2(a): exactly one wavelength index in range.
    if (lp.wavelength < 0 || lp.wavelength >= W) {
      out.push_back({ConstraintKind::UniqueWavelength, id,
                     "wavelength " + std::to_string(lp.wavelength) + " outside [0, W)"});
      continue;
    }
    bool links_ok = true;
    for (LinkId l : lp.link_ids) {
      if (l.index >= L || l.index >= t.link_count()) {
        out.push_back({ConstraintKind::FlowConservation, id,
                       "link " + std::to_string(l.index) + " does not exist"});
        links_ok = false;
        break;
      }
    }
    if (!links_ok) continue;

    // 2(b): the same wavelength is marked busy on every link of the path.
    for (LinkId l : lp.link_ids) {
      ++owners[l.index * W + lp.wavelength];
      if (!db.busy(l, lp.wavelength)) {
        out.push_back({ConstraintKind::Continuity, id,
                       "wavelength " + std::to_string(lp.wavelength) + " not held on link " +
                           std::to_string(l.index)});
      }
    }

    // 2(d): orient links by walking from the source and balance out-minus-in
    // indicator sums per node: +1 at source, -1 at destination, 0 elsewhere.
    std::vector<int> balance(t.node_count(), 0);
    std::vector<int> visits(t.node_count(), 0);
    NodeId cur = lp.source;
    visits[cur.index] = 1;
    std::string why;
    for (LinkId l : lp.link_ids) {
      const Link& link = t.link(l);
      NodeId tail = cur;
      if (!link.touches(cur)) {
        if (why.empty()) why = "gap at node " + std::to_string(cur.index);
        tail = link.endpoint_a;
      }
      const NodeId head = link.other(tail);
      ++balance[tail.index];
      --balance[head.index];
      if (++visits[head.index] > 1 && why.empty()) {
        why = "node " + std::to_string(head.index) + " revisited";
      }
      cur = head;
    }
    if (why.empty()) {
      for (std::size_t n = 0; n < t.node_count(); ++n) {
        const int expect = n == lp.source.index ? 1 : n == lp.destination.index ? -1 : 0;
        if (lp.source == lp.destination || balance[n] != expect) {
          why = "imbalance " + std::to_string(balance[n]) + " at node " + std::to_string(n);
          break;
        }
      }
    }
    if (!why.empty()) out.push_back({ConstraintKind::FlowConservation, id, why});
  }

  // 2(c) and orphaned busy cells.
  for (std::size_t l = 0; l < L; ++l) {
    for (int w = 0; w < W; ++w) {
      const auto n = owners[l * W + w];
      if (n > 1) {
        out.push_back({ConstraintKind::DistinctOnLink, 0,
                       std::to_string(n) + " lightpaths on link " + std::to_string(l) +
                           " wavelength " + std::to_string(w)});
      } else if (n == 0 && db.busy(LinkId{l}, w)) {
        out.push_back({ConstraintKind::OrphanOccupancy, 0,
                       "link " + std::to_string(l) + " wavelength " + std::to_string(w) +
                           " busy without owner"});
      }
    }
  }
  return out;
}

}  // namespace drwa
