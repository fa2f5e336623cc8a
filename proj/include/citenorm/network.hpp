#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citenorm/common.hpp"
#include "citenorm/tsv.hpp"

namespace citenorm {

struct PublicationMeta {
  std::string id;
  int year = 0;
  std::int64_t total_reference_count = 0;  // all references, in or out of the dataset
};

struct CitationEdge {
  std::string citing;
  std::string cited;
};

// deg: undirected relation count; ref/cit: within-network out/in citations.
struct Degrees {
  std::size_t deg = 0;
  std::size_t ref = 0;
  std::size_t cit = 0;

  friend bool operator==(const Degrees&, const Degrees&) = default;
};

struct LoadOptions {
  bool strict = false;      // edges naming unknown publications are an error
  bool has_header = false;  // skip the first row of both files
};

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges_collapsed = 0;
  std::size_t missing_publications = 0;  // metadata stubs synthesized
  std::vector<std::string> warnings;
};

// Compressed sparse rows over node indices; each row sorted ascending.
class Adjacency {
 public:
  Adjacency() = default;

  Adjacency(std::size_t n, std::vector<std::pair<NodeIndex, NodeIndex>> arcs) : offsets_(n + 1, 0) {
    std::sort(arcs.begin(), arcs.end());
    for (const auto& a : arcs) ++offsets_[a.first + 1];
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    targets_.reserve(arcs.size());
    for (const auto& a : arcs) targets_.push_back(a.second);
  }

  std::span<const NodeIndex> operator[](NodeIndex v) const {
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeIndex v) const { return offsets_[v + 1] - offsets_[v]; }
  bool contains(NodeIndex v, NodeIndex w) const {
    const auto row = (*this)[v];
    return std::binary_search(row.begin(), row.end(), w);
  }
  std::size_t arc_count() const { return targets_.size(); }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeIndex> targets_;
};

// Directed citations restricted to one dataset plus the derived undirected
// relation set. Nodes are indexed in id order, so the same sources always
// give the same indices regardless of row order. Immutable once built.
class CitationNetwork {
 public:
  CitationNetwork() : ids_(std::make_shared<std::vector<std::string>>()) {}

  static CitationNetwork build(std::vector<PublicationMeta> pubs, std::span<const CitationEdge> edges,
                               const LoadOptions& options = {}, LoadReport* report = nullptr) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t k = 0; k < pubs.size(); ++k) {
      if (!tsv::valid_id(pubs[k].id)) throw Error("invalid publication id '" + pubs[k].id + "'");
      if (!seen.emplace(pubs[k].id, k).second) throw Error("duplicate publication id '" + pubs[k].id + "'");
    }
    for (const auto& e : edges) {
      for (const std::string* id : {&e.citing, &e.cited}) {
        if (seen.count(*id)) continue;
        if (options.strict) throw Error("edge references unknown publication '" + *id + "'");
        seen.emplace(*id, pubs.size());
        pubs.push_back(PublicationMeta{*id, 0, 0});
        ++rep.missing_publications;
        if (rep.missing_publications <= 20)
          rep.warnings.push_back("publication '" + *id + "' missing from metadata; stub created");
      }
    }
    std::sort(pubs.begin(), pubs.end(), [](const auto& a, const auto& b) { return id_less(a.id, b.id); });

    CitationNetwork net;
    auto ids = std::make_shared<std::vector<std::string>>();
    ids->reserve(pubs.size());
    for (NodeIndex k = 0; k < pubs.size(); ++k) {
      ids->push_back(pubs[k].id);
      net.index_.emplace(pubs[k].id, k);
    }
    net.ids_ = std::move(ids);
    net.meta_ = std::move(pubs);

    std::vector<std::pair<NodeIndex, NodeIndex>> arcs;
    arcs.reserve(edges.size());
    for (const auto& e : edges) {
      const NodeIndex a = net.index_.at(e.citing);
      const NodeIndex b = net.index_.at(e.cited);
      if (a == b) {
        ++rep.self_loops_dropped;
        continue;
      }
      arcs.emplace_back(a, b);
    }
    std::sort(arcs.begin(), arcs.end());
    const auto unique_end = std::unique(arcs.begin(), arcs.end());
    rep.duplicate_edges_collapsed += static_cast<std::size_t>(arcs.end() - unique_end);
    arcs.erase(unique_end, arcs.end());
    if (rep.self_loops_dropped > 0)
      rep.warnings.push_back(std::to_string(rep.self_loops_dropped) + " self-citation(s) dropped");

    const std::size_t n = net.meta_.size();
    std::vector<std::pair<NodeIndex, NodeIndex>> reversed, undirected;
    reversed.reserve(arcs.size());
    undirected.reserve(2 * arcs.size());
    for (const auto& [a, b] : arcs) {
      reversed.emplace_back(b, a);
      undirected.emplace_back(a, b);
      undirected.emplace_back(b, a);
    }
    std::sort(undirected.begin(), undirected.end());
    undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());

    net.directed_edge_count_ = arcs.size();
    net.relation_count_ = undirected.size() / 2;
    net.out_ = Adjacency(n, std::move(arcs));
    net.in_ = Adjacency(n, std::move(reversed));
    net.rel_ = Adjacency(n, std::move(undirected));
    return net;
  }

  std::size_t size() const noexcept { return meta_.size(); }
  std::size_t directed_edge_count() const noexcept { return directed_edge_count_; }
  std::size_t relation_count() const noexcept { return relation_count_; }

  const std::string& id(NodeIndex v) const { return (*ids_)[v]; }
  const std::vector<std::string>& ids() const noexcept { return *ids_; }
  std::shared_ptr<const std::vector<std::string>> shared_ids() const noexcept { return ids_; }
  const PublicationMeta& meta(NodeIndex v) const { return meta_.at(v); }

  std::optional<NodeIndex> find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  NodeIndex index_of(std::string_view id) const {
    if (auto v = find(id)) return *v;
    throw Error("unknown publication '" + std::string(id) + "'");
  }

  // Publications v cites, publications citing v, and v's undirected relations.
  std::span<const NodeIndex> references(NodeIndex v) const { return out_[checked(v)]; }
  std::span<const NodeIndex> citations(NodeIndex v) const { return in_[checked(v)]; }
  std::span<const NodeIndex> relations(NodeIndex v) const { return rel_[checked(v)]; }

  bool cites(NodeIndex i, NodeIndex j) const { return out_.contains(checked(i), checked(j)); }

  // r_ij = max(c_ij, c_ji).
  int relation(NodeIndex i, NodeIndex j) const {
    if (i == j) throw Error("relation of a publication with itself is undefined");
    return rel_.contains(checked(i), checked(j)) ? 1 : 0;
  }

  Degrees degrees(NodeIndex v) const {
    checked(v);
    return {rel_.degree(v), out_.degree(v), in_.degree(v)};
  }
  std::size_t deg(NodeIndex v) const { return rel_.degree(checked(v)); }

  // Each unordered relation once as (lo, hi), sorted.
  std::vector<std::pair<NodeIndex, NodeIndex>> relation_pairs() const {
    std::vector<std::pair<NodeIndex, NodeIndex>> out;
    out.reserve(relation_count_);
    for (NodeIndex v = 0; v < size(); ++v)
      for (NodeIndex w : rel_[v])
        if (v < w) out.emplace_back(v, w);
    return out;
  }

  std::vector<CitationEdge> directed_edges() const {
    std::vector<CitationEdge> out;
    out.reserve(directed_edge_count_);
    for (NodeIndex v = 0; v < size(); ++v)
      for (NodeIndex w : out_[v]) out.push_back({id(v), id(w)});
    return out;
  }

  const std::vector<PublicationMeta>& publications() const noexcept { return meta_; }

 private:
  NodeIndex checked(NodeIndex v) const {
    if (v >= size()) throw Error("node index " + std::to_string(v) + " out of range");
    return v;
  }

  std::shared_ptr<const std::vector<std::string>> ids_;
  std::vector<PublicationMeta> meta_;
  std::unordered_map<std::string, NodeIndex> index_;
  Adjacency out_, in_, rel_;
  std::size_t directed_edge_count_ = 0;
  std::size_t relation_count_ = 0;
};

// Edge rows: citing_id <TAB> cited_id.
inline std::vector<CitationEdge> read_edges(std::istream& in, const std::string& source, bool has_header) {
  tsv::Reader reader(in, source);
  std::vector<CitationEdge> edges;
  std::vector<std::string_view> f;
  bool first = true;
  while (reader.next(f)) {
    if (std::exchange(first, false) && has_header) continue;
    if (f.size() != 2) reader.fail("expected 2 columns (citing, cited), found " + std::to_string(f.size()));
    if (!tsv::valid_id(f[0]) || !tsv::valid_id(f[1])) reader.fail("unparsable publication id");
    edges.push_back({std::string(f[0]), std::string(f[1])});
  }
  return edges;
}

// Publication rows: id <TAB> year <TAB> total_reference_count. A first row
// with a non-numeric year is taken as a header.
inline std::vector<PublicationMeta> read_publications(std::istream& in, const std::string& source,
                                                      bool has_header) {
  tsv::Reader reader(in, source);
  std::vector<PublicationMeta> pubs;
  std::vector<std::string_view> f;
  bool first = true;
  while (reader.next(f)) {
    const bool is_first = std::exchange(first, false);
    if (is_first && has_header) continue;
    if (f.size() != 3) reader.fail("expected 3 columns (id, year, total_reference_count), found " +
                                   std::to_string(f.size()));
    const auto year = tsv::parse_int<int>(f[1]);
    if (is_first && !year) continue;
    const auto total = tsv::parse_int<std::int64_t>(f[2]);
    if (!tsv::valid_id(f[0])) reader.fail("unparsable publication id");
    if (!year || *year < 1800 || *year > 2100) reader.fail("year must be an integer in 1800..2100");
    if (!total || *total < 0) reader.fail("total_reference_count must be a non-negative integer");
    pubs.push_back({std::string(f[0]), *year, *total});
  }
  return pubs;
}

inline CitationNetwork load_network(std::istream& edges, std::istream& pubs, const LoadOptions& options = {},
                                    LoadReport* report = nullptr, const std::string& edges_name = "edges",
                                    const std::string& pubs_name = "publications") {
  auto e = read_edges(edges, edges_name, options.has_header);
  auto p = read_publications(pubs, pubs_name, options.has_header);
  return CitationNetwork::build(std::move(p), e, options, report);
}

inline CitationNetwork load_network_files(const std::string& edges_path, const std::string& pubs_path,
                                          const LoadOptions& options = {}, LoadReport* report = nullptr) {
  std::ifstream e(edges_path), p(pubs_path);
  if (!e) throw Error("cannot open edge file " + edges_path);
  if (!p) throw Error("cannot open publication file " + pubs_path);
  return load_network(e, p, options, report, edges_path, pubs_path);
}

inline void write_edges(std::ostream& out, const CitationNetwork& net) {
  for (const auto& e : net.directed_edges()) out << e.citing << '\t' << e.cited << '\n';
}

inline void write_publications(std::ostream& out, const CitationNetwork& net) {
  for (const auto& p : net.publications()) out << p.id << '\t' << p.year << '\t' << p.total_reference_count << '\n';
}

// Per-publication tallies: dataset,id,degree,references,citations.
inline void write_degrees_csv(std::ostream& out, const CitationNetwork& net, const std::string& dataset) {
  out << "dataset,id,degree,references,citations\n";
  for (NodeIndex v = 0; v < net.size(); ++v) {
    const auto d = net.degrees(v);
    out << dataset << ',' << net.id(v) << ',' << d.deg << ',' << d.ref << ',' << d.cit << '\n';
  }
}

}  // namespace citenorm
