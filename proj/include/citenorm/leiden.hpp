#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/normalize.hpp"
#include "citenorm/rng.hpp"

namespace citenorm {

// CPM resolution parameter; strictly positive and finite.
class Resolution {
 public:
  explicit Resolution(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("resolution parameter must be positive and finite");
  }
  double value() const noexcept { return gamma_; }

  friend bool operator==(const Resolution&, const Resolution&) = default;

 private:
  double gamma_;
};

// Resolution values used for every dataset: 0.05 down to 0.0001.
inline std::vector<double> default_gammas() { return {0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001}; }

// Gains closer than this are ties.
inline constexpr double kGainTolerance = 1e-12;

// Constant Potts Model: sum over clusters of (internal weight - gamma * C(n_c, 2)).
inline double cpm_quality(const WeightedGraph& g, const Clustering& c, Resolution gamma) {
  if (c.size() != g.size()) throw Error("clustering does not cover the graph's node set");
  double internal = 0.0;
  for (const auto& e : g.edges())
    if (c[e.a] == c[e.b]) internal += e.weight;
  double pairs = 0.0;
  for (auto n : c.cluster_sizes()) pairs += 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return internal - gamma.value() * pairs;
}

struct LeidenOptions {
  std::uint64_t seed = 0;
  int max_iterations = 10;
};

struct LeidenResult {
  Clustering clustering;
  // CPM quality of the starting singletons followed by the quality after each
  // iteration.
  std::vector<double> quality_trace;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Graph at one aggregation level: node sizes count original nodes, self loops
// are dropped (they never enter a move gain).
struct LevelGraph {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeIndex> nbr;
  std::vector<double> w;
  std::vector<double> node_size;

  std::size_t begin(NodeIndex v) const { return offsets[v]; }
  std::size_t end(NodeIndex v) const { return offsets[v + 1]; }
};

inline LevelGraph level_from(const WeightedGraph& g) {
  LevelGraph lg;
  lg.n = g.size();
  lg.offsets.assign(lg.n + 1, 0);
  lg.node_size.assign(lg.n, 1.0);
  for (NodeIndex v = 0; v < lg.n; ++v) {
    const auto nb = g.neighbors(v);
    const auto ws = g.neighbor_weights(v);
    lg.nbr.insert(lg.nbr.end(), nb.begin(), nb.end());
    lg.w.insert(lg.w.end(), ws.begin(), ws.end());
    lg.offsets[v + 1] = lg.nbr.size();
  }
  return lg;
}

// Collapses each part (labels 0..parts-1) of `g` into one node.
inline LevelGraph aggregate(const LevelGraph& g, const std::vector<NodeIndex>& part, std::size_t parts) {
  std::vector<std::vector<NodeIndex>> members(parts);
  for (NodeIndex v = 0; v < g.n; ++v) members[part[v]].push_back(v);
  LevelGraph out;
  out.n = parts;
  out.offsets.assign(parts + 1, 0);
  out.node_size.assign(parts, 0.0);
  std::vector<double> acc(parts, 0.0);
  std::vector<char> mark(parts, 0);
  std::vector<NodeIndex> touched;
  for (NodeIndex c = 0; c < parts; ++c) {
    touched.clear();
    for (NodeIndex v : members[c]) {
      out.node_size[c] += g.node_size[v];
      for (std::size_t k = g.begin(v); k < g.end(v); ++k) {
        const NodeIndex d = part[g.nbr[k]];
        if (d == c) continue;
        if (!mark[d]) {
          mark[d] = 1;
          touched.push_back(d);
        }
        acc[d] += g.w[k];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (NodeIndex d : touched) {
      out.nbr.push_back(d);
      out.w.push_back(acc[d]);
      acc[d] = 0.0;
      mark[d] = 0;
    }
    out.offsets[c + 1] = out.nbr.size();
  }
  return out;
}

// Relabels to 0..K-1 in first-occurrence order; returns K.
inline std::size_t densify(std::vector<NodeIndex>& labels) {
  if (labels.empty()) return 0;
  const NodeIndex top = *std::max_element(labels.begin(), labels.end());
  std::vector<NodeIndex> remap(static_cast<std::size_t>(top) + 1, static_cast<NodeIndex>(-1));
  NodeIndex next = 0;
  for (auto& l : labels) {
    if (remap[l] == static_cast<NodeIndex>(-1)) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

// Queue-based local moving. Each visited node goes to the neighbouring
// cluster (or a fresh one) with the largest CPM gain; ties keep the current
// cluster, then prefer the lowest label. Returns whether anything moved.
inline bool move_nodes(const LevelGraph& g, std::vector<NodeIndex>& membership, double gamma, SplitMix64& rng) {
  const std::size_t n = g.n;
  std::vector<double> csize(n, 0.0);
  std::vector<std::size_t> ccount(n, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    csize[membership[v]] += g.node_size[v];
    ++ccount[membership[v]];
  }
  std::vector<NodeIndex> empty;
  for (std::size_t c = n; c-- > 0;)
    if (ccount[c] == 0) empty.push_back(static_cast<NodeIndex>(c));

  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), NodeIndex{0});
  rng.shuffle(order);
  std::deque<NodeIndex> queue(order.begin(), order.end());
  std::vector<char> queued(n, 1);

  std::vector<double> link(n, 0.0);
  std::vector<char> mark(n, 0);
  std::vector<NodeIndex> touched;
  bool changed = false;

  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    const NodeIndex current = membership[v];
    const double sv = g.node_size[v];

    touched.clear();
    for (std::size_t k = g.begin(v); k < g.end(v); ++k) {
      const NodeIndex c = membership[g.nbr[k]];
      if (!mark[c]) {
        mark[c] = 1;
        touched.push_back(c);
      }
      link[c] += g.w[k];
    }
    std::sort(touched.begin(), touched.end());

    csize[current] -= sv;
    --ccount[current];
    NodeIndex best = current;
    double best_gain = link[current] - gamma * sv * csize[current];
    for (NodeIndex c : touched) {
      if (c == current) continue;
      const double gain = link[c] - gamma * sv * csize[c];
      if (gain > best_gain + kGainTolerance) {
        best = c;
        best_gain = gain;
      }
    }
    if (ccount[current] > 0 && 0.0 > best_gain + kGainTolerance) best = empty.back();

    if (!empty.empty() && best == empty.back()) empty.pop_back();
    csize[best] += sv;
    ++ccount[best];
    if (ccount[current] == 0 && best != current) empty.push_back(current);

    for (NodeIndex c : touched) {
      link[c] = 0.0;
      mark[c] = 0;
    }

    if (best != current) {
      changed = true;
      membership[v] = best;
      for (std::size_t k = g.begin(v); k < g.end(v); ++k) {
        const NodeIndex u = g.nbr[k];
        if (!queued[u] && membership[u] != best) {
          queued[u] = 1;
          queue.push_back(u);
        }
      }
    }
  }
  return changed;
}

// Refinement: inside every cluster of `membership`, start from singletons and
// let well-connected singleton nodes merge into well-connected refined
// clusters, picking a target with probability proportional to its positive
// CPM gain. Returns refined labels (arbitrary, < n).
inline std::vector<NodeIndex> refine(const LevelGraph& g, const std::vector<NodeIndex>& membership, double gamma,
                                     SplitMix64& rng) {
  const std::size_t n = g.n;
  std::vector<NodeIndex> refined(n);
  std::iota(refined.begin(), refined.end(), NodeIndex{0});
  std::vector<double> rsize(g.node_size);
  std::vector<std::size_t> rcount(n, 1);

  // Weight from each node to the rest of its own cluster.
  std::vector<double> internal(n, 0.0);
  for (NodeIndex v = 0; v < n; ++v)
    for (std::size_t k = g.begin(v); k < g.end(v); ++k)
      if (membership[g.nbr[k]] == membership[v]) internal[v] += g.w[k];
  std::vector<double> rext(internal);

  std::vector<std::vector<NodeIndex>> clusters(n);
  for (NodeIndex v = 0; v < n; ++v) clusters[membership[v]].push_back(v);

  std::vector<double> link(n, 0.0);
  std::vector<char> mark(n, 0);
  std::vector<NodeIndex> touched;
  std::vector<std::pair<NodeIndex, double>> candidates;

  for (const auto& members : clusters) {
    if (members.size() < 2) continue;
    double total = 0.0;
    for (NodeIndex v : members) total += g.node_size[v];

    std::vector<NodeIndex> ready;
    for (NodeIndex v : members)
      if (internal[v] >= gamma * g.node_size[v] * (total - g.node_size[v])) ready.push_back(v);
    rng.shuffle(ready);

    for (NodeIndex v : ready) {
      if (rcount[refined[v]] != 1) continue;
      const NodeIndex own = refined[v];
      const double sv = g.node_size[v];
      touched.clear();
      for (std::size_t k = g.begin(v); k < g.end(v); ++k) {
        const NodeIndex u = g.nbr[k];
        if (membership[u] != membership[v]) continue;
        const NodeIndex r = refined[u];
        if (r == own) continue;
        if (!mark[r]) {
          mark[r] = 1;
          touched.push_back(r);
        }
        link[r] += g.w[k];
      }
      std::sort(touched.begin(), touched.end());
      candidates.clear();
      double gain_sum = 0.0;
      for (NodeIndex r : touched) {
        const bool well_connected = rext[r] >= gamma * rsize[r] * (total - rsize[r]);
        const double gain = link[r] - gamma * sv * rsize[r];
        if (well_connected && gain > kGainTolerance) {
          candidates.emplace_back(r, gain);
          gain_sum += gain;
        }
      }
      if (!candidates.empty()) {
        double pick = rng.uniform() * gain_sum;
        NodeIndex target = candidates.back().first;
        for (const auto& [r, gain] : candidates) {
          if (pick < gain) {
            target = r;
            break;
          }
          pick -= gain;
        }
        const double w_vt = link[target];
        refined[v] = target;
        rsize[target] += sv;
        ++rcount[target];
        rcount[own] = 0;
        rext[target] = rext[target] + internal[v] - 2.0 * w_vt;
      }
      for (NodeIndex r : touched) {
        link[r] = 0.0;
        mark[r] = 0;
      }
    }
  }
  return refined;
}

// One Leiden pass starting from `start` on the original graph.
inline std::vector<NodeIndex> leiden_pass(const LevelGraph& base, std::vector<NodeIndex> start, double gamma,
                                          SplitMix64& rng) {
  LevelGraph level = base;
  std::vector<NodeIndex> membership = std::move(start);
  std::vector<NodeIndex> node_of(base.n);  // original node -> level node
  std::iota(node_of.begin(), node_of.end(), NodeIndex{0});

  for (;;) {
    move_nodes(level, membership, gamma, rng);
    std::vector<NodeIndex> dense = membership;
    const std::size_t clusters = densify(dense);
    if (clusters == level.n) break;

    std::vector<NodeIndex> refined = refine(level, membership, gamma, rng);
    const std::size_t parts = densify(refined);
    if (parts == level.n) break;

    std::vector<NodeIndex> next_membership(parts);
    for (NodeIndex v = 0; v < level.n; ++v) next_membership[refined[v]] = membership[v];
    densify(next_membership);
    for (auto& x : node_of) x = refined[x];
    level = aggregate(level, refined, parts);
    membership = std::move(next_membership);
  }

  std::vector<NodeIndex> out(base.n);
  for (NodeIndex v = 0; v < base.n; ++v) out[v] = membership[node_of[v]];
  return out;
}

// Splits every cluster into its connected components.
inline std::vector<NodeIndex> split_disconnected(const LevelGraph& g, const std::vector<NodeIndex>& membership) {
  std::vector<NodeIndex> out(g.n, static_cast<NodeIndex>(-1));
  NodeIndex next = 0;
  std::vector<NodeIndex> stack;
  for (NodeIndex s = 0; s < g.n; ++s) {
    if (out[s] != static_cast<NodeIndex>(-1)) continue;
    out[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeIndex v = stack.back();
      stack.pop_back();
      for (std::size_t k = g.begin(v); k < g.end(v); ++k) {
        const NodeIndex u = g.nbr[k];
        if (out[u] == static_cast<NodeIndex>(-1) && membership[u] == membership[v]) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return out;
}

}  // namespace detail

// Maximizes CPM with the Leiden algorithm. An iteration is a full
// move/refine/aggregate pass started from the current partition; the run
// stops when an iteration leaves the partition unchanged or after
// max_iterations. Every returned cluster induces a connected subgraph.
inline LeidenResult leiden(const WeightedGraph& graph, Resolution gamma, const LeidenOptions& options = {}) {
  if (options.max_iterations < 1) throw Error("max_iterations must be >= 1");
  LeidenResult result;
  result.clustering = Clustering::singletons(graph.size());
  result.quality_trace.push_back(cpm_quality(graph, result.clustering, gamma));
  if (graph.size() == 0) {
    result.converged = true;
    return result;
  }

  const detail::LevelGraph base = detail::level_from(graph);
  SplitMix64 rng(options.seed);
  std::vector<NodeIndex> membership(graph.size());
  std::iota(membership.begin(), membership.end(), NodeIndex{0});

  for (int it = 0; it < options.max_iterations; ++it) {
    auto next = detail::leiden_pass(base, membership, gamma.value(), rng);
    next = detail::split_disconnected(base, next);
    detail::densify(next);
    Clustering clustering(std::vector<ClusterLabel>(next.begin(), next.end()));
    ++result.iterations;
    result.quality_trace.push_back(cpm_quality(graph, clustering, gamma));
    const bool unchanged = clustering == result.clustering;
    result.clustering = std::move(clustering);
    membership = std::move(next);
    if (unchanged) {
      result.converged = true;
      break;
    }
  }
  return result;
}

inline Clustering leiden_cluster(const WeightedGraph& graph, Resolution gamma, std::uint64_t seed,
                                 int max_iterations = 10) {
  return leiden(graph, gamma, {seed, max_iterations}).clustering;
}

struct SweepEntry {
  double gamma;
  Clustering clustering;
};

// One clustering per resolution, the i-th seeded with seed ^ i.
inline std::vector<SweepEntry> resolution_sweep(const WeightedGraph& graph, std::span<const double> gammas,
                                                std::uint64_t seed, int max_iterations = 10) {
  if (gammas.empty()) throw Error("resolution sweep needs at least one gamma");
  std::set<double> distinct(gammas.begin(), gammas.end());
  if (distinct.size() != gammas.size()) throw Error("duplicate gamma values in resolution sweep");
  std::vector<SweepEntry> out;
  for (std::size_t i = 0; i < gammas.size(); ++i)
    out.push_back({gammas[i], leiden_cluster(graph, Resolution(gammas[i]), seed ^ i, max_iterations)});
  return out;
}

}  // namespace citenorm
