#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/network.hpp"
#include "citenorm/rng.hpp"

namespace citenorm {

struct SynthParams {
  std::vector<std::size_t> block_sizes{250, 250, 250, 250};
  double refs_per_node = 8.0;        // mean within-dataset references of a regular publication
  double mixing = 0.1;               // share of references aimed at other blocks
  double attachment_exponent = 1.0;  // weight (in-degree + 1)^exponent
  double hub_fraction = 0.02;        // share of publications with boosted attractiveness
  double hub_boost = 8.0;            // attractiveness multiplier of those publications
  std::size_t reviews_per_block = 2;  // recent reference-rich publications per block
  std::size_t review_refs = 60;
  int first_year = 1995;
  int last_year = 2021;
};

struct PlantedNetwork {
  CitationNetwork network;
  Clustering planted;  // block of every publication, aligned with network indices
  SynthParams params;
};

namespace detail {

// Fenwick tree over non-negative weights with weighted sampling.
class WeightTree {
 public:
  explicit WeightTree(std::size_t n) : tree_(n + 1, 0.0), value_(n, 0.0) {}

  void set(std::size_t k, double w) {
    const double delta = w - value_[k];
    value_[k] = w;
    for (std::size_t i = k + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  double total() const {
    double s = 0.0;
    for (std::size_t i = tree_.size() - 1; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }
  // Smallest k whose prefix sum exceeds `target`.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return std::min(pos, value_.size() - 1);
  }
  double value(std::size_t k) const { return value_[k]; }

 private:
  std::vector<double> tree_;
  std::vector<double> value_;
};

inline std::string next_numeric_id(const std::vector<std::string>& ids, std::uint64_t offset) {
  std::uint64_t top = 0;
  for (const auto& id : ids)
    if (is_all_digits(id) && id.size() < 19) top = std::max<std::uint64_t>(top, std::stoull(id));
  return std::to_string(top + offset);
}

}  // namespace detail

// Planted-partition citation network. Publications are created oldest first
// and cite only older ones; a reference stays in the citing publication's
// block with probability 1 - mixing and targets are drawn by preferential
// attachment. The newest publications of each block are reviews with
// `review_refs` references.
inline PlantedNetwork generate(const SynthParams& params, std::uint64_t seed) {
  const std::size_t blocks = params.block_sizes.size();
  if (blocks == 0) throw Error("at least one block is required");
  for (auto s : params.block_sizes)
    if (s < 2) throw Error("block sizes must be >= 2");
  if (!(params.mixing >= 0.0 && params.mixing < 1.0)) throw Error("mixing must lie in [0, 1)");
  if (!(params.refs_per_node > 0.0)) throw Error("refs_per_node must be positive");
  const std::size_t smallest = *std::min_element(params.block_sizes.begin(), params.block_sizes.end());
  if (params.refs_per_node >= static_cast<double>(smallest))
    throw Error("infeasible parameters: refs_per_node exceeds block capacity");
  if (params.reviews_per_block > 0 && params.review_refs >= smallest)
    throw Error("infeasible parameters: review_refs exceeds block capacity");
  if (params.first_year > params.last_year) throw Error("first_year after last_year");

  SplitMix64 rng(seed);

  // Age order: regular publications interleaved across blocks, reviews last.
  std::vector<ClusterLabel> block_of;
  for (ClusterLabel b = 0; b < blocks; ++b) block_of.insert(block_of.end(), params.block_sizes[b], b);
  rng.shuffle(block_of);
  const std::size_t regular = block_of.size();
  for (std::size_t r = 0; r < params.reviews_per_block; ++r)
    for (ClusterLabel b = 0; b < blocks; ++b) block_of.push_back(b);
  const std::size_t n = block_of.size();

  std::vector<std::size_t> pos_in_block(n);
  std::vector<std::size_t> block_count(blocks, 0);
  for (std::size_t v = 0; v < n; ++v) pos_in_block[v] = block_count[block_of[v]]++;
  std::vector<std::vector<std::size_t>> members(blocks);
  for (std::size_t v = 0; v < n; ++v) members[block_of[v]].push_back(v);

  std::vector<char> boosted(n, 0);
  for (std::size_t v = 0; v < regular; ++v) boosted[v] = rng.uniform() < params.hub_fraction;

  std::vector<detail::WeightTree> trees;
  for (ClusterLabel b = 0; b < blocks; ++b) trees.emplace_back(block_count[b]);
  detail::WeightTree block_totals(blocks);
  std::vector<std::size_t> indegree(n, 0);
  auto attractiveness = [&](std::size_t v) {
    return std::pow(static_cast<double>(indegree[v] + 1), params.attachment_exponent) *
           (boosted[v] ? params.hub_boost : 1.0);
  };
  auto refresh = [&](std::size_t v) {
    const ClusterLabel b = block_of[v];
    trees[b].set(pos_in_block[v], attractiveness(v));
    block_totals.set(b, trees[b].total());
  };

  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  std::vector<std::int64_t> out_count(n, 0);
  std::unordered_set<std::size_t> cited;
  std::vector<std::size_t> available(blocks, 0);

  for (std::size_t v = 0; v < n; ++v) {
    const ClusterLabel home = block_of[v];
    const bool review = v >= regular;
    const std::size_t older_total = v;
    std::size_t wanted;
    if (review) {
      wanted = params.review_refs;
    } else {
      const auto span = static_cast<std::uint64_t>(std::max(1.0, std::round(2.0 * params.refs_per_node - 1.0)));
      wanted = 1 + static_cast<std::size_t>(rng.below(span));
    }
    wanted = std::min(wanted, older_total);
    cited.clear();
    std::size_t attempts = 0;
    // Each reference draws its side once; duplicate or too-new targets are
    // redrawn on the same side, so rejections do not shift the mixing share.
    int side = -1;  // 0 inside, 1 outside, -1 not drawn yet
    std::size_t misses = 0;
    while (cited.size() < wanted && attempts < 50 * wanted + 100) {
      ++attempts;
      if (side < 0 || misses > 20) {
        side = rng.uniform() >= params.mixing ? 0 : 1;
        misses = 0;
      }
      const double others_total = block_totals.total() - block_totals.value(home);
      bool inside = side == 0;
      if (inside && available[home] == 0) inside = false;
      if (!inside && others_total <= 0.0) inside = true;
      if (inside && available[home] == 0) break;
      ClusterLabel b = home;
      if (!inside) {
        // Pick another block in proportion to its attractiveness mass.
        double pick = rng.uniform() * others_total;
        for (ClusterLabel c = 0; c < blocks; ++c) {
          if (c == home) continue;
          b = c;
          if (pick < block_totals.value(c)) break;
          pick -= block_totals.value(c);
        }
      }
      const std::size_t k = trees[b].find(rng.uniform() * trees[b].total());
      const std::size_t target = members[b][k];
      if (target >= v || !cited.insert(target).second) {
        ++misses;
        continue;
      }
      side = -1;
      arcs.emplace_back(v, target);
      ++indegree[target];
      refresh(target);
    }
    out_count[v] = static_cast<std::int64_t>(cited.size());
    refresh(v);
    ++available[home];
  }

  // Ids are numeric, increasing with age; years spread over the range.
  std::vector<PublicationMeta> pubs(n);
  const int span_years = params.last_year - params.first_year + 1;
  for (std::size_t v = 0; v < n; ++v) {
    pubs[v].id = std::to_string(100001 + v);
    if (v >= regular) {
      pubs[v].year = params.last_year;
      pubs[v].total_reference_count = std::max<std::int64_t>(101, out_count[v] + out_count[v] / 4);
    } else {
      pubs[v].year = params.first_year + static_cast<int>((v * static_cast<std::size_t>(span_years)) / std::max<std::size_t>(regular, 1));
      pubs[v].total_reference_count =
          out_count[v] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(out_count[v]) + 1));
    }
  }
  std::vector<CitationEdge> edges;
  edges.reserve(arcs.size());
  for (const auto& [a, b] : arcs) edges.push_back({pubs[a].id, pubs[b].id});

  PlantedNetwork out;
  out.network = CitationNetwork::build(pubs, edges, {true, false});
  std::vector<ClusterLabel> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[out.network.index_of(pubs[v].id)] = block_of[v];
  out.planted = Clustering(std::move(labels));
  out.params = params;
  return out;
}

struct HubOptions {
  double home_share = 0.3;       // share of a hub's targets inside its own block
  std::size_t partner_refs = 3;  // references of the low-degree partner, all in one block
};

// Adds publications that cite `hub_out_degree` publications spread over the
// blocks (a `home_share` of them in a home block, which is the hub's planted
// label) plus exactly one new low-degree partner that itself cites
// `partner_refs` publications of the smallest other block.
inline PlantedNetwork hubify(const PlantedNetwork& input, std::size_t hub_count, std::size_t hub_out_degree,
                             std::uint64_t seed, const HubOptions& options = {}) {
  if (hub_count == 0) return input;
  if (hub_out_degree < 20) throw Error("hub_out_degree must be >= 20");
  const CitationNetwork& net = input.network;
  if (hub_out_degree > net.size()) throw Error("hub_out_degree exceeds the node count");
  const std::size_t blocks = input.planted.cluster_count();
  if (blocks == 0) throw Error("planted labels are empty");

  SplitMix64 rng(seed);
  std::vector<std::vector<NodeIndex>> members(blocks);
  for (NodeIndex v = 0; v < net.size(); ++v) members[input.planted[v]].push_back(v);

  auto pubs = net.publications();
  auto edges = net.directed_edges();
  std::unordered_map<std::string, ClusterLabel> label_of;
  for (NodeIndex v = 0; v < net.size(); ++v) label_of[net.id(v)] = input.planted[v];
  const int year = input.params.last_year;

  const bool numeric = std::all_of(pubs.begin(), pubs.end(), [](const auto& p) { return is_all_digits(p.id); });
  std::uint64_t counter = 0;
  auto fresh_id = [&](const char* prefix) {
    ++counter;
    if (numeric) return detail::next_numeric_id(net.ids(), counter);
    return std::string(prefix) + std::to_string(counter);
  };

  for (std::size_t h = 0; h < hub_count; ++h) {
    const auto home = static_cast<ClusterLabel>(rng.below(blocks));
    // Partner block: the smallest block other than home (home if alone).
    ClusterLabel partner_block = home;
    for (ClusterLabel b = 0; b < blocks; ++b) {
      if (b == home && blocks > 1) continue;
      if (partner_block == home || members[b].size() < members[partner_block].size()) partner_block = b;
    }

    std::vector<NodeIndex> targets;
    if (hub_out_degree == net.size()) {
      targets.resize(net.size());
      std::iota(targets.begin(), targets.end(), NodeIndex{0});
    } else {
      std::vector<std::vector<NodeIndex>> pool = members;
      for (auto& p : pool) rng.shuffle(p);
      const auto home_quota = std::min(pool[home].size(), static_cast<std::size_t>(
                                                              std::llround(options.home_share * hub_out_degree)));
      targets.assign(pool[home].end() - static_cast<std::ptrdiff_t>(home_quota), pool[home].end());
      pool[home].resize(pool[home].size() - home_quota);
      // Round-robin over the other blocks, then anything left.
      for (ClusterLabel b = static_cast<ClusterLabel>((home + 1) % blocks); targets.size() < hub_out_degree;
           b = static_cast<ClusterLabel>((b + 1) % blocks)) {
        if (b == home && blocks > 1) {
          bool others_empty = true;
          for (ClusterLabel c = 0; c < blocks; ++c)
            if (c != home && !pool[c].empty()) others_empty = false;
          if (!others_empty) continue;
        }
        if (pool[b].empty()) continue;
        targets.push_back(pool[b].back());
        pool[b].pop_back();
      }
    }

    const std::string hub_id = fresh_id("hub");
    const std::string partner_id = fresh_id("partner");
    pubs.push_back({hub_id, year, static_cast<std::int64_t>(targets.size() + 1)});
    pubs.push_back({partner_id, year, static_cast<std::int64_t>(options.partner_refs)});
    label_of[hub_id] = home;
    label_of[partner_id] = partner_block;
    for (NodeIndex t : targets) edges.push_back({hub_id, net.id(t)});
    edges.push_back({hub_id, partner_id});

    std::vector<NodeIndex> partner_pool = members[partner_block];
    rng.shuffle(partner_pool);
    const std::size_t refs = std::min(options.partner_refs, partner_pool.size());
    for (std::size_t k = 0; k < refs; ++k) edges.push_back({partner_id, net.id(partner_pool[k])});
  }

  PlantedNetwork out;
  out.network = CitationNetwork::build(std::move(pubs), edges, {true, false});
  std::vector<ClusterLabel> labels(out.network.size());
  for (NodeIndex v = 0; v < out.network.size(); ++v) labels[v] = label_of.at(out.network.id(v));
  out.planted = Clustering(std::move(labels));
  out.params = input.params;
  return out;
}

// pub_id <TAB> block, id order.
inline void write_planted(std::ostream& out, const PlantedNetwork& p) {
  for (NodeIndex v = 0; v < p.network.size(); ++v) out << p.network.id(v) << '\t' << p.planted[v] << '\n';
}

}  // namespace citenorm
