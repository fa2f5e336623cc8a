#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citenorm/common.hpp"
#include "citenorm/network.hpp"

namespace citenorm {

enum class ApproachKind {
  unnormalized,
  fractional,
  geometric,
  geometric_limit,
  directional_fractional,
  directional_geometric,
};

// A normalization approach. `limit` is only meaningful for geometric_limit.
struct Approach {
  ApproachKind kind = ApproachKind::unnormalized;
  int limit = 0;

  static Approach unnormalized() { return {ApproachKind::unnormalized, 0}; }
  static Approach fractional() { return {ApproachKind::fractional, 0}; }
  static Approach geometric() { return {ApproachKind::geometric, 0}; }
  static Approach geometric_limit(int n) {
    if (n < 1) throw Error("geometric_limit requires N >= 1");
    return {ApproachKind::geometric_limit, n};
  }
  static Approach directional_fractional() { return {ApproachKind::directional_fractional, 0}; }
  static Approach directional_geometric() { return {ApproachKind::directional_geometric, 0}; }

  // unnormalized, fractional, geometric, geometric_limit5, directional_fractional, ...
  std::string name() const {
    switch (kind) {
      case ApproachKind::unnormalized: return "unnormalized";
      case ApproachKind::fractional: return "fractional";
      case ApproachKind::geometric: return "geometric";
      case ApproachKind::geometric_limit: return "geometric_limit" + std::to_string(limit);
      case ApproachKind::directional_fractional: return "directional_fractional";
      case ApproachKind::directional_geometric: return "directional_geometric";
    }
    return "?";
  }

  friend bool operator==(const Approach&, const Approach&) = default;
  friend auto operator<=>(const Approach&, const Approach&) = default;
};

// Accepts the names produced by Approach::name(); "geometric_limit" without a
// suffix (or "geometric_limitN") takes `default_limit`.
inline Approach parse_approach(std::string_view name, int default_limit = 5) {
  if (name == "unnormalized") return Approach::unnormalized();
  if (name == "fractional") return Approach::fractional();
  if (name == "geometric") return Approach::geometric();
  if (name == "directional_fractional") return Approach::directional_fractional();
  if (name == "directional_geometric") return Approach::directional_geometric();
  constexpr std::string_view prefix = "geometric_limit";
  if (name.substr(0, prefix.size()) == prefix) {
    const auto rest = name.substr(prefix.size());
    if (rest.empty() || rest == "N") return Approach::geometric_limit(default_limit);
    if (auto n = tsv::parse_int<int>(rest); n && *n >= 1) return Approach::geometric_limit(*n);
  }
  throw Error("unknown normalization approach '" + std::string(name) + "'");
}

// The six approaches in canonical order.
inline std::vector<Approach> all_approaches(int limit = 5) {
  return {Approach::unnormalized(),           Approach::fractional(),
          Approach::geometric(),              Approach::geometric_limit(limit),
          Approach::directional_fractional(), Approach::directional_geometric()};
}

// Edge weights from degree tallies. Arguments are relation counts (or, for
// the directional forms, reference/citation counts) and must be >= 1.
namespace weights {

inline double fractional(double deg_i, double deg_j) { return (1.0 / deg_i + 1.0 / deg_j) / 2.0; }

inline double geometric(double deg_i, double deg_j) { return 1.0 / std::sqrt(deg_i * deg_j); }

inline double geometric_limit(double deg_i, double deg_j, int limit) {
  const double n = static_cast<double>(limit);
  return geometric(std::max(deg_i, n), std::max(deg_j, n));
}

}  // namespace weights

// Weight of the undirected relation {i, j}; 0 when r_ij = 0.
inline double weight_unnormalized(const CitationNetwork& net, NodeIndex i, NodeIndex j) {
  return net.relation(i, j) ? 1.0 : 0.0;
}

inline double weight_fractional(const CitationNetwork& net, NodeIndex i, NodeIndex j) {
  if (!net.relation(i, j)) return 0.0;
  return weights::fractional(static_cast<double>(net.deg(i)), static_cast<double>(net.deg(j)));
}

inline double weight_geometric(const CitationNetwork& net, NodeIndex i, NodeIndex j) {
  if (!net.relation(i, j)) return 0.0;
  return weights::geometric(static_cast<double>(net.deg(i)), static_cast<double>(net.deg(j)));
}

inline double weight_geometric_limit(const CitationNetwork& net, NodeIndex i, NodeIndex j, int limit) {
  if (limit < 1) throw Error("geometric_limit requires N >= 1");
  if (!net.relation(i, j)) return 0.0;
  return weights::geometric_limit(static_cast<double>(net.deg(i)), static_cast<double>(net.deg(j)), limit);
}

namespace detail {

// Evaluates a directional formula f(ref(citing), cit(cited)) for every
// direction present and averages when the pair cites both ways.
template <typename F>
double directional(const CitationNetwork& net, NodeIndex i, NodeIndex j, F f) {
  if (!net.relation(i, j)) return 0.0;
  double sum = 0.0;
  int directions = 0;
  if (net.cites(i, j)) {
    sum += f(static_cast<double>(net.references(i).size()), static_cast<double>(net.citations(j).size()));
    ++directions;
  }
  if (net.cites(j, i)) {
    sum += f(static_cast<double>(net.references(j).size()), static_cast<double>(net.citations(i).size()));
    ++directions;
  }
  return sum / directions;
}

}  // namespace detail

inline double weight_directional_fractional(const CitationNetwork& net, NodeIndex i, NodeIndex j) {
  return detail::directional(net, i, j, weights::fractional);
}

inline double weight_directional_geometric(const CitationNetwork& net, NodeIndex i, NodeIndex j) {
  return detail::directional(net, i, j, weights::geometric);
}

inline double edge_weight(const CitationNetwork& net, NodeIndex i, NodeIndex j, const Approach& approach) {
  switch (approach.kind) {
    case ApproachKind::unnormalized: return weight_unnormalized(net, i, j);
    case ApproachKind::fractional: return weight_fractional(net, i, j);
    case ApproachKind::geometric: return weight_geometric(net, i, j);
    case ApproachKind::geometric_limit: return weight_geometric_limit(net, i, j, approach.limit);
    case ApproachKind::directional_fractional: return weight_directional_fractional(net, i, j);
    case ApproachKind::directional_geometric: return weight_directional_geometric(net, i, j);
  }
  throw Error("unknown normalization approach");
}

struct WeightedEdge {
  NodeIndex a;  // a < b
  NodeIndex b;
  double weight;
};

// Undirected, positively weighted graph with a CSR view for clustering.
class WeightedGraph {
 public:
  WeightedGraph() : ids_(std::make_shared<std::vector<std::string>>()) {}

  // `edges` must have a < b, no duplicates, positive weights.
  WeightedGraph(std::shared_ptr<const std::vector<std::string>> ids, std::vector<WeightedEdge> edges)
      : ids_(std::move(ids)), edges_(std::move(edges)) {
    const std::size_t n = ids_->size();
    std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    offsets_.assign(n + 1, 0);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      if (e.a >= e.b || e.b >= n) throw Error("weighted edge endpoints invalid");
      if (!(e.weight > 0.0)) throw Error("edge weights must be positive");
      if (k > 0 && edges_[k - 1].a == e.a && edges_[k - 1].b == e.b) throw Error("duplicate weighted edge");
      ++offsets_[e.a + 1];
      ++offsets_[e.b + 1];
    }
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
    neighbors_.resize(2 * edges_.size());
    weights_.resize(2 * edges_.size());
    auto cursor = offsets_;
    for (const auto& e : edges_) {
      neighbors_[cursor[e.a]] = e.b;
      weights_[cursor[e.a]++] = e.weight;
      neighbors_[cursor[e.b]] = e.a;
      weights_[cursor[e.b]++] = e.weight;
    }
  }

  // Unweighted convenience for tests and small fixtures.
  static WeightedGraph from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
    auto ids = std::make_shared<std::vector<std::string>>();
    for (std::size_t v = 0; v < n; ++v) ids->push_back(std::to_string(v));
    std::vector<WeightedEdge> norm;
    for (auto e : edges) {
      if (e.a > e.b) std::swap(e.a, e.b);
      norm.push_back(e);
    }
    return WeightedGraph(std::move(ids), std::move(norm));
  }

  std::size_t size() const noexcept { return ids_->size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }
  const std::string& id(NodeIndex v) const { return (*ids_)[v]; }
  const std::vector<std::string>& ids() const noexcept { return *ids_; }

  std::span<const NodeIndex> neighbors(NodeIndex v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const double> neighbor_weights(NodeIndex v) const {
    return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  // 0 when absent.
  double weight(NodeIndex u, NodeIndex v) const {
    const auto nb = neighbors(u);
    const auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return 0.0;
    return neighbor_weights(u)[static_cast<std::size_t>(it - nb.begin())];
  }

 private:
  std::shared_ptr<const std::vector<std::string>> ids_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeIndex> neighbors_;
  std::vector<double> weights_;
};

// One weighted edge per relation; isolated publications are kept as nodes.
inline WeightedGraph build_weighted_graph(const CitationNetwork& net, const Approach& approach) {
  if (approach.kind == ApproachKind::geometric_limit && approach.limit < 1)
    throw Error("geometric_limit requires N >= 1");
  const auto pairs = net.relation_pairs();
  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) edges.push_back({i, j, edge_weight(net, i, j, approach)});
  return WeightedGraph(net.shared_ids(), std::move(edges));
}

// id_a <TAB> id_b <TAB> weight, 17 significant digits.
inline void write_weighted_edges(std::ostream& out, const WeightedGraph& g) {
  for (const auto& e : g.edges()) out << g.id(e.a) << '\t' << g.id(e.b) << '\t' << format_real(e.weight, 17) << '\n';
}

}  // namespace citenorm
