#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citenorm/common.hpp"
#include "citenorm/tsv.hpp"

namespace citenorm {

using ClusterLabel = std::uint32_t;

// A partition of objects 0..n-1. Labels are kept dense (0..K-1) and numbered
// by first occurrence, so two Clusterings compare equal iff they describe the
// same partition.
class Clustering {
 public:
  Clustering() = default;

  explicit Clustering(std::span<const ClusterLabel> labels) : labels_(labels.begin(), labels.end()) { normalize(); }
  explicit Clustering(std::vector<ClusterLabel> labels) : labels_(std::move(labels)) { normalize(); }
  Clustering(std::initializer_list<ClusterLabel> labels) : labels_(labels) { normalize(); }

  static Clustering singletons(std::size_t n) {
    std::vector<ClusterLabel> l(n);
    std::iota(l.begin(), l.end(), ClusterLabel{0});
    return Clustering(std::move(l));
  }
  static Clustering single_cluster(std::size_t n) { return Clustering(std::vector<ClusterLabel>(n, 0)); }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t cluster_count() const noexcept { return count_; }
  ClusterLabel operator[](std::size_t v) const { return labels_[v]; }
  const std::vector<ClusterLabel>& labels() const noexcept { return labels_; }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(count_, 0);
    for (auto l : labels_) ++sizes[l];
    return sizes;
  }

  // Members of each cluster, ascending.
  std::vector<std::vector<NodeIndex>> members() const {
    std::vector<std::vector<NodeIndex>> out(count_);
    for (NodeIndex v = 0; v < labels_.size(); ++v) out[labels_[v]].push_back(v);
    return out;
  }

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  void normalize() {
    std::unordered_map<ClusterLabel, ClusterLabel> remap;
    for (auto& l : labels_) {
      const auto [it, inserted] = remap.emplace(l, static_cast<ClusterLabel>(remap.size()));
      l = it->second;
    }
    count_ = remap.size();
  }

  std::vector<ClusterLabel> labels_;
  std::size_t count_ = 0;
};

// Cluster numbers for output: decreasing size, ties by smallest member id.
inline std::vector<ClusterLabel> ranked_labels(const Clustering& c, std::span<const std::string> ids) {
  const auto members = c.members();
  std::vector<ClusterLabel> order(c.cluster_count());
  std::iota(order.begin(), order.end(), ClusterLabel{0});
  std::vector<NodeIndex> first(c.cluster_count());
  for (ClusterLabel k = 0; k < c.cluster_count(); ++k)
    first[k] = *std::min_element(members[k].begin(), members[k].end(),
                                 [&](NodeIndex x, NodeIndex y) { return id_less(ids[x], ids[y]); });
  std::sort(order.begin(), order.end(), [&](ClusterLabel x, ClusterLabel y) {
    if (members[x].size() != members[y].size()) return members[x].size() > members[y].size();
    return id_less(ids[first[x]], ids[first[y]]);
  });
  std::vector<ClusterLabel> rank(c.cluster_count());
  for (ClusterLabel r = 0; r < order.size(); ++r) rank[order[r]] = r;
  std::vector<ClusterLabel> out(c.size());
  for (std::size_t v = 0; v < c.size(); ++v) out[v] = rank[c[v]];
  return out;
}

// pub_id <TAB> cluster_id, rows in id order.
inline void write_clustering(std::ostream& out, const Clustering& c, std::span<const std::string> ids) {
  if (ids.size() != c.size()) throw Error("clustering and id list differ in size");
  const auto ranked = ranked_labels(c, ids);
  std::vector<NodeIndex> rows(c.size());
  std::iota(rows.begin(), rows.end(), NodeIndex{0});
  std::sort(rows.begin(), rows.end(), [&](NodeIndex x, NodeIndex y) { return id_less(ids[x], ids[y]); });
  for (NodeIndex v : rows) out << ids[v] << '\t' << ranked[v] << '\n';
}

struct LabeledClustering {
  std::vector<std::string> ids;
  Clustering clustering;
};

inline LabeledClustering read_clustering(std::istream& in, const std::string& source) {
  tsv::Reader reader(in, source);
  std::vector<std::string_view> f;
  LabeledClustering out;
  std::vector<ClusterLabel> labels;
  std::unordered_map<std::string, ClusterLabel> label_ids;
  std::unordered_map<std::string, bool> seen;
  while (reader.next(f)) {
    if (f.size() != 2) reader.fail("expected 2 columns (pub_id, cluster_id)");
    if (!tsv::valid_id(f[0]) || f[1].empty()) reader.fail("unparsable row");
    if (!seen.emplace(std::string(f[0]), true).second) reader.fail("publication assigned twice");
    const auto [it, _] = label_ids.emplace(std::string(f[1]), static_cast<ClusterLabel>(label_ids.size()));
    out.ids.emplace_back(f[0]);
    labels.push_back(it->second);
  }
  out.clustering = Clustering(std::move(labels));
  return out;
}

}  // namespace citenorm
