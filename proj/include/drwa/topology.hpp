#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "drwa/core.hpp"

namespace drwa {

struct Link {
  NodeId endpoint_a;
  NodeId endpoint_b;
  double cost = 1.0;

  NodeId other(NodeId n) const { return n == endpoint_a ? endpoint_b : endpoint_a; }
  bool touches(NodeId n) const { return n == endpoint_a || n == endpoint_b; }

  bool operator==(const Link&) const = default;
};

struct Adjacent {
  NodeId node;
  LinkId link;
};

// Undirected, cost-weighted fiber graph. Immutable once constructed.
//
// Construction validates: node ids in range, no self-loops, at most one link
// per unordered pair, positive finite costs, and connectivity. LinkIds are
// the positions in the link list; neighbor lists are sorted by node index.
class Topology {
 public:
  Topology(std::size_t node_count, std::vector<Link> links)
      : node_count_(node_count), links_(std::move(links)) {
    if (node_count_ < 2) throw ValidationError("topology needs at least 2 nodes");
    link_index_.assign(node_count_ * node_count_, kNoLink);
    adjacency_.resize(node_count_);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const Link& l = links_[i];
      const std::size_t a = l.endpoint_a.index;
      const std::size_t b = l.endpoint_b.index;
      if (a >= node_count_ || b >= node_count_) {
        throw ValidationError("link " + describe(l) + " references a node outside [0, " +
                              std::to_string(node_count_) + ")");
      }
      if (a == b) throw ValidationError("self-loop on node " + std::to_string(a));
      if (!(l.cost > 0.0) || l.cost == std::numeric_limits<double>::infinity()) {
        throw ValidationError("link " + describe(l) + " has non-positive cost");
      }
      if (link_index_[a * node_count_ + b] != kNoLink) {
        throw ValidationError("duplicate link between " + std::to_string(a) + " and " +
                              std::to_string(b));
      }
      link_index_[a * node_count_ + b] = static_cast<std::int32_t>(i);
      link_index_[b * node_count_ + a] = static_cast<std::int32_t>(i);
      adjacency_[a].push_back({l.endpoint_b, LinkId{i}});
      adjacency_[b].push_back({l.endpoint_a, LinkId{i}});
    }
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end(),
                [](const Adjacent& x, const Adjacent& y) { return x.node < y.node; });
    }
    if (!connected()) throw ValidationError("topology is not connected");
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t link_count() const { return links_.size(); }
  std::span<const Link> links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(id.index); }

  std::span<const Adjacent> neighbors(NodeId n) const { return adjacency_.at(n.index); }

  std::optional<LinkId> link_between(NodeId u, NodeId v) const {
    if (u.index >= node_count_ || v.index >= node_count_) return std::nullopt;
    const auto idx = link_index_[u.index * node_count_ + v.index];
    if (idx == kNoLink) return std::nullopt;
    return LinkId{static_cast<std::size_t>(idx)};
  }

  bool adjacent(NodeId u, NodeId v) const { return link_between(u, v).has_value(); }

  /// Links traversed by a node sequence; throws ValidationError on a gap.
  std::vector<LinkId> path_links(std::span<const NodeId> nodes) const {
    std::vector<LinkId> out;
    if (nodes.size() >= 2) out.reserve(nodes.size() - 1);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      auto l = link_between(nodes[i - 1], nodes[i]);
      if (!l) {
        throw ValidationError("nodes " + std::to_string(nodes[i - 1].index) + " and " +
                              std::to_string(nodes[i].index) + " are not adjacent");
      }
      out.push_back(*l);
    }
    return out;
  }

  double path_cost(std::span<const NodeId> nodes) const {
    double total = 0.0;
    for (LinkId l : path_links(nodes)) total += links_[l.index].cost;
    return total;
  }

  bool operator==(const Topology& other) const {
    return node_count_ == other.node_count_ && links_ == other.links_;
  }

 private:
  static constexpr std::int32_t kNoLink = -1;

  static std::string describe(const Link& l) {
    return "(" + std::to_string(l.endpoint_a.index) + ", " + std::to_string(l.endpoint_b.index) +
           ")";
  }

  bool connected() const {
    std::vector<char> seen(node_count_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const Adjacent& a : adjacency_[u]) {
        if (!seen[a.node.index]) {
          seen[a.node.index] = 1;
          ++reached;
          stack.push_back(a.node.index);
        }
      }
    }
    return reached == node_count_;
  }

  std::size_t node_count_;
  std::vector<Link> links_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::vector<std::int32_t> link_index_;
};

/// Free-function form of Topology::neighbors.
inline std::span<const Adjacent> neighbors(const Topology& t, NodeId n) { return t.neighbors(n); }

inline double path_cost(const Topology& t, std::span<const NodeId> nodes) {
  return t.path_cost(nodes);
}

// Text format:
//   nodes <N>
//   link <u> <v> <cost>
// '#' starts a comment, tokens are whitespace separated, ids are 0-based.
inline Topology load_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> node_count;
  std::vector<Link> links;

  auto fail = [&](const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
  };
  auto parse_index = [&](const std::string& tok) -> std::size_t {
    std::size_t value = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
    return value;
  };
  auto parse_cost = [&](const std::string& tok) -> double {
    double value = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size()) fail("bad cost '" + tok + "'");
    return value;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> tok;
    for (std::string t; tokens >> t;) tok.push_back(std::move(t));
    if (tok.empty()) continue;

    if (tok[0] == "nodes") {
      if (node_count) fail("duplicate 'nodes' line");
      if (tok.size() != 2) fail("expected 'nodes <N>'");
      node_count = parse_index(tok[1]);
    } else if (tok[0] == "link") {
      if (!node_count) fail("'link' before 'nodes'");
      if (tok.size() != 4) fail("expected 'link <u> <v> <cost>'");
      links.push_back({NodeId{parse_index(tok[1])}, NodeId{parse_index(tok[2])}, parse_cost(tok[3])});
    } else {
      fail("unknown directive '" + tok[0] + "'");
    }
  }
  if (!node_count) throw ParseError("missing 'nodes' line");
  return Topology(*node_count, std::move(links));
}

inline Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open topology file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_topology(buf.str());
}

inline std::string save_topology(const Topology& t) {
  std::string out = "nodes " + std::to_string(t.node_count()) + "\n";
  for (const Link& l : t.links()) {
    out += "link " + std::to_string(l.endpoint_a.index) + " " + std::to_string(l.endpoint_b.index) +
           " " + format_number(l.cost) + "\n";
  }
  return out;
}

// 14-node, 21-link NSFNET backbone with unit link costs.
inline Topology nsf14() {
  static constexpr std::pair<std::size_t, std::size_t> kLinks[] = {
      {0, 1},  {0, 2},  {0, 7},   {1, 2},   {1, 3},   {2, 5},   {3, 4},
      {3, 10}, {4, 5},  {4, 6},   {5, 9},   {5, 13},  {6, 7},   {7, 8},
      {8, 9},  {8, 11}, {8, 12},  {10, 11}, {10, 12}, {11, 13}, {12, 13},
  };
  std::vector<Link> links;
  for (auto [a, b] : kLinks) links.push_back({NodeId{a}, NodeId{b}, 1.0});
  return Topology(14, std::move(links));
}

}  // namespace drwa
