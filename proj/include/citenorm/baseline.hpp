#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/network.hpp"
#include "citenorm/rng.hpp"

namespace citenorm {

// Baseline classes: the within-dataset reference lists of recent,
// reference-rich publications, used as proxy topics for ARI.
struct BaselineClass {
  NodeIndex class_node;          // the citing publication
  std::vector<NodeIndex> items;  // its within-dataset references, ascending

  friend bool operator==(const BaselineClass&, const BaselineClass&) = default;
};

struct BaselineThresholds {
  std::int64_t min_total_refs = 100;  // exclusive: more than this many references in total
  double min_within_share = 0.5;      // inclusive
  int min_year = 2019;                // inclusive
  double overlap = 0.3;               // inclusive
};

struct SelectionLog {
  std::size_t considered = 0;
  std::size_t excluded_total_refs = 0;
  std::size_t excluded_within_share = 0;
  std::size_t excluded_year = 0;
  std::size_t selected = 0;
  std::size_t after_dedupe = 0;
  std::size_t shared_items_reassigned = 0;
  std::size_t classes_emptied = 0;
};

// Rules are checked in order (total references, within share, year); each
// rejection is counted under the first rule that fails.
inline std::vector<BaselineClass> select_candidates(const CitationNetwork& net, const BaselineThresholds& t = {},
                                                    SelectionLog* log = nullptr) {
  SelectionLog local;
  SelectionLog& lg = log ? *log : local;
  std::vector<BaselineClass> out;
  for (NodeIndex p = 0; p < net.size(); ++p) {
    const auto& meta = net.meta(p);
    ++lg.considered;
    if (meta.total_reference_count <= t.min_total_refs) {
      ++lg.excluded_total_refs;
      continue;
    }
    const auto refs = net.references(p);
    const double share = static_cast<double>(refs.size()) / static_cast<double>(meta.total_reference_count);
    if (share < t.min_within_share || refs.empty()) {
      ++lg.excluded_within_share;
      continue;
    }
    if (meta.year < t.min_year) {
      ++lg.excluded_year;
      continue;
    }
    out.push_back({p, std::vector<NodeIndex>(refs.begin(), refs.end())});
  }
  lg.selected = out.size();
  return out;
}

// Bibliographic-coupling overlap |a ∩ b| / min(|a|, |b|).
inline double coupling_overlap(const BaselineClass& a, const BaselineClass& b) {
  if (a.items.empty() || b.items.empty()) throw Error("coupling overlap of an empty class");
  std::size_t shared = 0;
  auto x = a.items.begin();
  auto y = b.items.begin();
  while (x != a.items.end() && y != b.items.end()) {
    if (*x < *y)
      ++x;
    else if (*y < *x)
      ++y;
    else {
      ++shared;
      ++x;
      ++y;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(std::min(a.items.size(), b.items.size()));
}

// Same-topic classes (overlap >= threshold) form a graph; each connected
// component keeps one class chosen uniformly at random. Output is ordered by
// class node.
inline std::vector<BaselineClass> dedupe_same_topic(std::vector<BaselineClass> classes, double threshold,
                                                    std::uint64_t seed) {
  std::sort(classes.begin(), classes.end(),
            [](const BaselineClass& a, const BaselineClass& b) { return a.class_node < b.class_node; });
  const std::size_t k = classes.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  // Only pairs sharing at least one item can overlap.
  std::unordered_map<NodeIndex, std::vector<std::size_t>> holders;
  for (std::size_t c = 0; c < k; ++c)
    for (NodeIndex item : classes[c].items) holders[item].push_back(c);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (const auto& [item, cs] : holders)
    for (std::size_t x = 0; x < cs.size(); ++x)
      for (std::size_t y = x + 1; y < cs.size(); ++y) ++shared[{std::min(cs[x], cs[y]), std::max(cs[x], cs[y])}];
  for (const auto& [pair, count] : shared) {
    const double base = static_cast<double>(std::min(classes[pair.first].items.size(), classes[pair.second].items.size()));
    if (static_cast<double>(count) / base >= threshold) parent[find(pair.first)] = find(pair.second);
  }

  // Components in order of their first (smallest) class.
  std::vector<std::vector<std::size_t>> components;
  std::unordered_map<std::size_t, std::size_t> component_of_root;
  for (std::size_t c = 0; c < k; ++c) {
    const auto [it, inserted] = component_of_root.emplace(find(c), components.size());
    if (inserted) components.emplace_back();
    components[it->second].push_back(c);
  }
  SplitMix64 rng(seed);
  std::vector<BaselineClass> out;
  for (const auto& comp : components) out.push_back(classes[comp[rng.below(comp.size())]]);
  std::sort(out.begin(), out.end(),
            [](const BaselineClass& a, const BaselineClass& b) { return a.class_node < b.class_node; });
  return out;
}

struct BaselineClassSet {
  std::vector<BaselineClass> classes;                    // pairwise disjoint, ordered by class node
  std::vector<std::pair<NodeIndex, NodeIndex>> assignment;  // (item, class node), ordered by item

  std::size_t item_count() const noexcept { return assignment.size(); }
};

// Every item held by several classes stays only in the class whose items it
// has the most relations with; ties go to the smallest class id. Counts use
// the class contents before any reassignment. Emptied classes are dropped.
inline BaselineClassSet disjoin_items(const std::vector<BaselineClass>& classes, const CitationNetwork& net,
                                      SelectionLog* log = nullptr) {
  std::vector<BaselineClass> sorted = classes;
  std::sort(sorted.begin(), sorted.end(),
            [](const BaselineClass& a, const BaselineClass& b) { return a.class_node < b.class_node; });
  std::unordered_map<NodeIndex, std::vector<std::size_t>> holders;
  for (std::size_t c = 0; c < sorted.size(); ++c)
    for (NodeIndex item : sorted[c].items) holders[item].push_back(c);

  std::map<NodeIndex, std::size_t> owner;
  std::size_t reassigned = 0;
  std::vector<std::size_t> tally(sorted.size(), 0);
  for (const auto& [item, cs] : holders) {
    if (cs.size() == 1) {
      owner[item] = cs.front();
      continue;
    }
    ++reassigned;
    for (NodeIndex u : net.relations(item)) {
      const auto it = holders.find(u);
      if (it == holders.end()) continue;
      for (std::size_t c : it->second) ++tally[c];
    }
    std::size_t best = cs.front();  // cs is ascending, so ties keep the smallest class
    for (std::size_t c : cs)
      if (tally[c] > tally[best]) best = c;
    owner[item] = best;
    for (NodeIndex u : net.relations(item)) {
      const auto it = holders.find(u);
      if (it == holders.end()) continue;
      for (std::size_t c : it->second) tally[c] = 0;
    }
  }

  std::vector<std::vector<NodeIndex>> kept(sorted.size());
  for (const auto& [item, c] : owner) kept[c].push_back(item);
  BaselineClassSet out;
  std::size_t emptied = 0;
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    if (kept[c].empty()) {
      ++emptied;
      continue;
    }
    out.classes.push_back({sorted[c].class_node, std::move(kept[c])});
  }
  for (const auto& [item, c] : owner) out.assignment.emplace_back(item, sorted[c].class_node);
  if (log) {
    log->shared_items_reassigned = reassigned;
    log->classes_emptied = emptied;
  }
  return out;
}

// select -> dedupe -> disjoin.
inline BaselineClassSet build_baseline(const CitationNetwork& net, const BaselineThresholds& t, std::uint64_t seed,
                                       SelectionLog* log = nullptr) {
  SelectionLog local;
  SelectionLog& lg = log ? *log : local;
  auto candidates = select_candidates(net, t, &lg);
  auto survivors = dedupe_same_topic(std::move(candidates), t.overlap, seed);
  lg.after_dedupe = survivors.size();
  return disjoin_items(survivors, net, &lg);
}

struct Delimited {
  std::vector<std::string> items;  // baseline items present in the clustering
  Clustering clustering;           // clustering restricted to `items`
  Clustering baseline;             // baseline classes over `items`
  std::size_t missing = 0;         // baseline items absent from the clustering
};

// Restricts a clustering (objects named by `clustering_ids`) to the baseline
// items and pairs it with the baseline partition of the same items.
inline Delimited delimit(const Clustering& clustering, std::span<const std::string> clustering_ids,
                         const BaselineClassSet& baseline, const CitationNetwork& net) {
  if (clustering_ids.size() != clustering.size()) throw Error("clustering and id list differ in size");
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t k = 0; k < clustering_ids.size(); ++k) position.emplace(clustering_ids[k], k);
  Delimited out;
  std::vector<ClusterLabel> left, right;
  for (const auto& [item, class_node] : baseline.assignment) {
    const auto it = position.find(net.id(item));
    if (it == position.end()) {
      ++out.missing;
      continue;
    }
    out.items.push_back(net.id(item));
    left.push_back(clustering[it->second]);
    right.push_back(class_node);
  }
  if (out.items.empty()) throw Error("clustering and baseline share no publications; ARI undefined");
  out.clustering = Clustering(std::move(left));
  out.baseline = Clustering(std::move(right));
  return out;
}

// item_id <TAB> class_id, ordered by item.
inline void write_baseline(std::ostream& out, const BaselineClassSet& b, const CitationNetwork& net) {
  for (const auto& [item, cls] : b.assignment) out << net.id(item) << '\t' << net.id(cls) << '\n';
}

inline void write_selection_log(std::ostream& out, const SelectionLog& log) {
  out << "considered\t" << log.considered << '\n'
      << "excluded_total_refs\t" << log.excluded_total_refs << '\n'
      << "excluded_within_share\t" << log.excluded_within_share << '\n'
      << "excluded_year\t" << log.excluded_year << '\n'
      << "selected\t" << log.selected << '\n'
      << "after_dedupe\t" << log.after_dedupe << '\n'
      << "shared_items_reassigned\t" << log.shared_items_reassigned << '\n'
      << "classes_emptied\t" << log.classes_emptied << '\n';
}

}  // namespace citenorm
