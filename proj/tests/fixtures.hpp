#pragma once

// Hand-built networks shared by the unit tests and the acceptance binary.

#include <string>
#include <utility>
#include <vector>

#include "citenorm/network.hpp"
#include "citenorm/synth.hpp"

namespace fixture {

// Five candidate publications (ids 1..5, year 2020, 101 references each) each
// citing 60 items:
//   1: 1000..1059     2: 1042..1101   (18 shared with 1: overlap 0.3)
//   3: 2000..2059     4: 2059..2118   (2059 shared with 3)
//   5: 3000..3059
// Item 2059 cites 2100 and 2101, so it relates to two items of class 4 and
// none of class 3. Publications 6, 7, 8 miss one selection rule each.
inline citenorm::CitationNetwork baseline_network() {
  using citenorm::CitationEdge;
  using citenorm::PublicationMeta;
  std::vector<PublicationMeta> pubs;
  std::vector<CitationEdge> edges;
  auto cite_range = [&](int from, int lo, int hi) {
    for (int k = lo; k <= hi; ++k) edges.push_back({std::to_string(from), std::to_string(k)});
  };
  for (int c = 1; c <= 5; ++c) pubs.push_back({std::to_string(c), 2020, 101});
  pubs.push_back({"6", 2020, 100});  // total not above 100
  pubs.push_back({"7", 2020, 200});  // 60 of 200 within the dataset
  pubs.push_back({"8", 2018, 101});  // too old
  cite_range(1, 1000, 1059);
  cite_range(2, 1042, 1101);
  cite_range(3, 2000, 2059);
  cite_range(4, 2059, 2118);
  cite_range(5, 3000, 3059);
  cite_range(6, 3000, 3059);
  cite_range(7, 3000, 3059);
  cite_range(8, 3000, 3059);
  edges.push_back({"2059", "2100"});
  edges.push_back({"2059", "2101"});
  for (int lo : {1000, 2000, 3000})
    for (int k = lo; k <= lo + 118; ++k)
      if (lo != 3000 || k <= 3059) pubs.push_back({std::to_string(k), 2000, 0});
  return citenorm::CitationNetwork::build(pubs, edges, {true, false});
}

// A 50-publication base (ids 1..50; publication 1 cites 2..23, so its degree
// is 22; 24..50 form a citation chain) split into blocks {1..30} and
// {31..50}, then one hub citing all 50 plus its low-degree partner. The hub
// seed is the first one that puts the hub in publication 1's block, so the
// partner's three references land in the other block.
struct HubExample {
  citenorm::PlantedNetwork planted;
  std::string hub, partner, k;
};

inline HubExample hub_example() {
  using namespace citenorm;
  std::vector<PublicationMeta> pubs;
  std::vector<CitationEdge> edges;
  for (int v = 1; v <= 50; ++v) pubs.push_back({std::to_string(v), 2010, 30});
  for (int v = 2; v <= 23; ++v) edges.push_back({"1", std::to_string(v)});
  for (int v = 24; v < 50; ++v) edges.push_back({std::to_string(v + 1), std::to_string(v)});
  PlantedNetwork base;
  base.network = CitationNetwork::build(pubs, edges, {true, false});
  std::vector<ClusterLabel> labels(50);
  for (NodeIndex v = 0; v < 50; ++v) labels[v] = std::stoi(base.network.id(v)) <= 30 ? 0 : 1;
  base.planted = Clustering(labels);
  for (std::uint64_t seed = 0;; ++seed) {
    auto out = hubify(base, 1, 50, seed);
    if (out.planted[out.network.index_of("51")] == out.planted[out.network.index_of("1")])
      return {std::move(out), "51", "52", "1"};
  }
}

// The hub-heavy planted network used for the recovery and PIA comparisons:
// 4 blocks of 250, mixing 0.05, then 60 hubs citing 100 publications each.
inline citenorm::PlantedNetwork hub_heavy(std::uint64_t seed) {
  citenorm::SynthParams p;
  p.mixing = 0.05;
  return citenorm::hubify(citenorm::generate(p, seed), 60, 100, seed + 100);
}

}  // namespace fixture
