#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/network.hpp"
#include "citenorm/normalize.hpp"

namespace citenorm {

namespace detail {

inline double pairs_of(double n) { return 0.5 * n * (n - 1.0); }

// Neumaier-compensated sum, independent of evaluation order quirks.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace detail

// Hubert-Arabie adjusted Rand index from the contingency table. When the
// index is degenerate (max index == expected index) the result is 1 for
// identical partitions and 0 otherwise.
inline double adjusted_rand_index(const Clustering& p, const Clustering& q) {
  if (p.size() != q.size()) throw Error("ARI needs two partitions of the same object set");
  if (p.empty()) throw Error("ARI of empty partitions is undefined");
  const double n = static_cast<double>(p.size());

  std::vector<std::pair<ClusterLabel, ClusterLabel>> cells(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) cells[v] = {p[v], q[v]};
  std::sort(cells.begin(), cells.end());
  double index = 0.0;
  for (std::size_t k = 0; k < cells.size();) {
    std::size_t run = k;
    while (run < cells.size() && cells[run] == cells[k]) ++run;
    index += detail::pairs_of(static_cast<double>(run - k));
    k = run;
  }
  double row = 0.0, col = 0.0;
  for (auto s : p.cluster_sizes()) row += detail::pairs_of(static_cast<double>(s));
  for (auto s : q.cluster_sizes()) col += detail::pairs_of(static_cast<double>(s));

  const double total = detail::pairs_of(n);
  const double expected = total > 0.0 ? row * col / total : 0.0;
  const double max_index = 0.5 * (row + col);
  if (max_index == expected) return p == q ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

// Binary dissimilarity: 0 for related publications, 1 otherwise.
inline int dissimilarity(const CitationNetwork& net, NodeIndex i, NodeIndex j) { return 1 - net.relation(i, j); }

namespace detail {

inline double silhouette_at(const CitationNetwork& net, const Clustering& c, std::span<const std::size_t> sizes,
                            NodeIndex i, std::vector<std::size_t>& hits, std::vector<ClusterLabel>& touched) {
  const ClusterLabel own = c[i];
  const std::size_t own_size = sizes[own];
  if (own_size == 1) return 0.0;

  touched.clear();
  for (NodeIndex u : net.relations(i)) {
    const ClusterLabel k = c[u];
    if (hits[k]++ == 0) touched.push_back(k);
  }
  const std::size_t in_own = hits[own];
  const double a = static_cast<double>(own_size - 1 - in_own) / static_cast<double>(own_size - 1);

  double b = std::numeric_limits<double>::infinity();
  std::size_t related_others = 0;
  for (ClusterLabel k : touched) {
    if (k != own) {
      ++related_others;
      b = std::min(b, static_cast<double>(sizes[k] - hits[k]) / static_cast<double>(sizes[k]));
    }
    hits[k] = 0;
  }
  if (sizes.size() - 1 > related_others) b = std::min(b, 1.0);

  const double denom = std::max(a, b);
  if (denom == 0.0) return 0.0;
  return (b - a) / denom;
}

}  // namespace detail

// s(i) = (b - a) / max(a, b) under the binary dissimilarity, evaluated from
// i's relations only: O(deg(i)) instead of O(n). Singleton clusters give 0.
inline std::vector<double> silhouette_widths(const CitationNetwork& net, const Clustering& c) {
  if (c.size() != net.size()) throw Error("clustering does not cover the network");
  if (c.cluster_count() < 2) throw Error("silhouette width needs at least two clusters");
  const auto sizes = c.cluster_sizes();
  std::vector<std::size_t> hits(c.cluster_count(), 0);
  std::vector<ClusterLabel> touched;
  std::vector<double> out(net.size());
  for (NodeIndex i = 0; i < net.size(); ++i) out[i] = detail::silhouette_at(net, c, sizes, i, hits, touched);
  return out;
}

inline double silhouette_width(const CitationNetwork& net, const Clustering& c, NodeIndex i) {
  if (c.size() != net.size()) throw Error("clustering does not cover the network");
  if (c.cluster_count() < 2) throw Error("silhouette width needs at least two clusters");
  if (i >= net.size()) throw Error("node index out of range");
  const auto sizes = c.cluster_sizes();
  std::vector<std::size_t> hits(c.cluster_count(), 0);
  std::vector<ClusterLabel> touched;
  return detail::silhouette_at(net, c, sizes, i, hits, touched);
}

enum class SilhouetteScope { with_relations, all };

inline SilhouetteScope parse_silhouette_scope(std::string_view s) {
  if (s == "with-relations") return SilhouetteScope::with_relations;
  if (s == "all") return SilhouetteScope::all;
  throw Error("silhouette scope must be 'all' or 'with-relations', got '" + std::string(s) + "'");
}

inline std::string to_string(SilhouetteScope s) { return s == SilhouetteScope::all ? "all" : "with-relations"; }

inline double mean_of(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty set");
  detail::CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value() / static_cast<double>(values.size());
}

inline double mean_silhouette(const CitationNetwork& net, const Clustering& c,
                              SilhouetteScope scope = SilhouetteScope::with_relations) {
  const auto widths = silhouette_widths(net, c);
  std::vector<double> picked;
  picked.reserve(widths.size());
  for (NodeIndex i = 0; i < net.size(); ++i)
    if (scope == SilhouetteScope::all || net.deg(i) > 0) picked.push_back(widths[i]);
  if (picked.empty()) throw Error("no publications in silhouette scope");
  return mean_of(picked);
}

struct PiaThresholds {
  std::size_t min_relations = 20;
  double max_within_share = 0.10;  // exclusive
};

// Probably inaccurate assignments: deg >= min_relations, share of relations
// inside the own cluster < max_within_share, and negative silhouette width.
inline std::size_t pia(const CitationNetwork& net, const Clustering& c, const PiaThresholds& t,
                       std::span<const double> widths) {
  if (widths.size() != net.size()) throw Error("silhouette widths do not cover the network");
  std::size_t count = 0;
  for (NodeIndex i = 0; i < net.size(); ++i) {
    const std::size_t deg = net.deg(i);
    if (deg == 0 || deg < t.min_relations) continue;
    std::size_t within = 0;
    for (NodeIndex u : net.relations(i))
      if (c[u] == c[i]) ++within;
    if (static_cast<double>(within) / static_cast<double>(deg) >= t.max_within_share) continue;
    if (widths[i] < 0.0) ++count;
  }
  return count;
}

inline std::size_t pia(const CitationNetwork& net, const Clustering& c, const PiaThresholds& t = {}) {
  const auto widths = silhouette_widths(net, c);
  return pia(net, c, t, widths);
}

// n / sum of squared cluster sizes.
inline double granularity(const Clustering& c) {
  if (c.empty()) throw Error("granularity of an empty clustering is undefined");
  double squares = 0.0;
  for (auto s : c.cluster_sizes()) squares += static_cast<double>(s) * static_cast<double>(s);
  return static_cast<double>(c.size()) / squares;
}

struct Skewness {
  double value = 0.0;
  bool defined = false;  // false: fewer than 3 values or zero variance
};

// Adjusted Fisher-Pearson sample skewness G1.
inline Skewness sample_skewness(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) return {};
  const double mean = mean_of(x);
  detail::CompensatedSum m2, m3;
  for (double v : x) {
    const double d = v - mean;
    m2.add(d * d);
    m3.add(d * d * d);
  }
  const double nn = static_cast<double>(n);
  const double var = m2.value() / nn;
  if (!(var > 0.0)) return {};
  const double g1 = (m3.value() / nn) / std::pow(var, 1.5);
  return {g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0), true};
}

inline Skewness cluster_size_skewness(const Clustering& c) {
  std::vector<double> sizes;
  for (auto s : c.cluster_sizes()) sizes.push_back(static_cast<double>(s));
  return sample_skewness(sizes);
}

// One (dataset, approach, gamma) evaluation. Missing optionals are written
// as empty fields.
struct EvaluationRecord {
  std::string dataset;
  std::string approach;
  double gamma = 0.0;
  double granularity = 0.0;
  std::optional<double> ari;
  std::optional<double> mean_silhouette;
  std::optional<std::size_t> pia;
  double skewness = 0.0;
  std::size_t n_clusters = 0;
  std::size_t n_publications = 0;
};

inline constexpr const char* kEvaluationHeader =
    "dataset,approach,gamma,granularity,ari,mean_silhouette,pia,skewness,n_clusters,n_publications";

inline std::string to_csv_row(const EvaluationRecord& r) {
  auto real = [](double v) { return format_real(v, 10); };
  std::string out = r.dataset + ',' + r.approach + ',' + real(r.gamma) + ',' + real(r.granularity) + ',';
  if (r.ari) out += real(*r.ari);
  out += ',';
  if (r.mean_silhouette) out += real(*r.mean_silhouette);
  out += ',';
  if (r.pia) out += std::to_string(*r.pia);
  out += ',' + real(r.skewness) + ',' + std::to_string(r.n_clusters) + ',' + std::to_string(r.n_publications);
  return out;
}

inline void write_evaluation_csv(std::ostream& out, std::span<const EvaluationRecord> records) {
  out << kEvaluationHeader << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

}  // namespace citenorm
