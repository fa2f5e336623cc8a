#include <gtest/gtest.h>

#include <sstream>

#include "citenorm/baseline.hpp"
#include "citenorm/metrics.hpp"
#include "fixtures.hpp"

using namespace citenorm;

namespace {

std::vector<std::string> class_ids(const std::vector<BaselineClass>& classes, const CitationNetwork& net) {
  std::vector<std::string> out;
  for (const auto& c : classes) out.push_back(net.id(c.class_node));
  return out;
}

}  // namespace

TEST(Selection, AppliesEachRule) {
  const auto net = fixture::baseline_network();
  SelectionLog log;
  const auto cands = select_candidates(net, {}, &log);
  EXPECT_EQ(class_ids(cands, net), (std::vector<std::string>{"1", "2", "3", "4", "5"}));
  EXPECT_EQ(log.considered, net.size());
  EXPECT_EQ(log.excluded_within_share, 1u);
  EXPECT_EQ(log.excluded_year, 1u);
  EXPECT_EQ(log.selected, 5u);
  for (const auto& c : cands) EXPECT_EQ(c.items.size(), 60u);
}

TEST(Selection, ThresholdEdges) {
  std::vector<PublicationMeta> pubs{{"1", 2019, 101}, {"2", 2019, 102}, {"3", 2000, 0}};
  std::vector<CitationEdge> edges;
  for (int k = 10; k < 61; ++k) {
    pubs.push_back({std::to_string(k), 2000, 0});
    edges.push_back({"1", std::to_string(k)});
    edges.push_back({"2", std::to_string(k)});
  }
  // 1: 51/101 >= 0.5 selected. 2: 51/102 = 0.5 selected (inclusive).
  const auto net = CitationNetwork::build(pubs, edges);
  EXPECT_EQ(select_candidates(net).size(), 2u);
  BaselineThresholds t;
  t.min_year = 2020;
  EXPECT_EQ(select_candidates(net, t).size(), 0u);
  t = {};
  t.min_total_refs = 101;
  EXPECT_EQ(select_candidates(net, t).size(), 1u);
}

TEST(Overlap, DividesBySmallerClass) {
  BaselineClass a{0, {1, 2, 3, 4}}, b{1, {3, 4}}, c{2, {9}};
  EXPECT_DOUBLE_EQ(coupling_overlap(a, b), 1.0);
  EXPECT_DOUBLE_EQ(coupling_overlap(a, c), 0.0);
  EXPECT_THROW(coupling_overlap(a, BaselineClass{3, {}}), Error);
}

TEST(Dedupe, KeepsOnePerSameTopicComponent) {
  const auto net = fixture::baseline_network();
  const auto cands = select_candidates(net);
  EXPECT_DOUBLE_EQ(coupling_overlap(cands[0], cands[1]), 0.3);
  std::set<std::string> kept_first;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto kept = dedupe_same_topic(cands, 0.3, seed);
    ASSERT_EQ(kept.size(), 4u);
    const auto ids = class_ids(kept, net);
    EXPECT_TRUE(ids[0] == "1" || ids[0] == "2");
    EXPECT_EQ(std::vector<std::string>(ids.begin() + 1, ids.end()), (std::vector<std::string>{"3", "4", "5"}));
    kept_first.insert(ids[0]);
    EXPECT_EQ(dedupe_same_topic(cands, 0.3, seed), kept);
  }
  EXPECT_EQ(kept_first.size(), 2u);  // both survivors are reachable
  EXPECT_EQ(dedupe_same_topic(cands, 0.31, 0).size(), 5u);
}

TEST(Dedupe, TransitiveChainsCollapse) {
  std::vector<BaselineClass> cs{{0, {1, 2}}, {1, {2, 3}}, {2, {3, 4}}, {3, {7, 8}}};
  EXPECT_EQ(dedupe_same_topic(cs, 0.5, 1).size(), 2u);
}

TEST(Disjoin, SharedItemGoesToBetterConnectedClass) {
  const auto net = fixture::baseline_network();
  SelectionLog log;
  const auto kept = dedupe_same_topic(select_candidates(net), 0.3, 1);
  const auto set = disjoin_items(kept, net, &log);
  EXPECT_EQ(log.shared_items_reassigned, 1u);
  EXPECT_EQ(set.classes.size(), 4u);
  const auto item = net.index_of("2059");
  for (const auto& [i, cls] : set.assignment) {
    if (i == item) {
      EXPECT_EQ(net.id(cls), "4");
    }
  }
  std::size_t total = 0;
  for (const auto& c : set.classes) total += c.items.size();
  EXPECT_EQ(total, set.item_count());
  EXPECT_EQ(set.item_count(), 4u * 60u - 1u);
}

TEST(Disjoin, TieGoesToSmallestClass) {
  std::vector<PublicationMeta> pubs{{"1", 2020, 0}, {"2", 2020, 0}, {"10", 2000, 0}};
  std::vector<CitationEdge> edges{{"1", "10"}, {"2", "10"}};
  const auto net = CitationNetwork::build(pubs, edges);
  const auto x = net.index_of("10");
  std::vector<BaselineClass> cs{{net.index_of("2"), {x}}, {net.index_of("1"), {x}}};
  SelectionLog log;
  const auto set = disjoin_items(cs, net, &log);
  ASSERT_EQ(set.classes.size(), 1u);
  EXPECT_EQ(net.id(set.classes[0].class_node), "1");
  EXPECT_EQ(log.classes_emptied, 1u);
}

TEST(Delimit, MatchedPartitions) {
  const auto net = fixture::baseline_network();
  const auto set = build_baseline(net, {}, 7);
  // A clustering equal to the baseline on its items, extra publications in
  // their own cluster.
  std::vector<ClusterLabel> labels(net.size(), 999);
  for (const auto& [item, cls] : set.assignment) labels[item] = cls;
  const Clustering c(labels);
  const auto d = delimit(c, net.ids(), set, net);
  EXPECT_EQ(d.items.size(), set.item_count());
  EXPECT_EQ(d.missing, 0u);
  EXPECT_EQ(d.clustering, d.baseline);
  EXPECT_EQ(adjusted_rand_index(d.clustering, d.baseline), 1.0);
}

TEST(Delimit, DropsItemsMissingFromClustering) {
  const auto net = fixture::baseline_network();
  const auto set = build_baseline(net, {}, 7);
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < set.assignment.size(); k += 2) ids.push_back(net.id(set.assignment[k].first));
  const auto d = delimit(Clustering::singletons(ids.size()), ids, set, net);
  EXPECT_EQ(d.items.size(), ids.size());
  EXPECT_EQ(d.items.size() + d.missing, set.item_count());
  const std::vector<std::string> none{"1"};
  EXPECT_THROW(delimit(Clustering::singletons(1), none, set, net), Error);
}

TEST(Baseline, SeedReproducibleDump) {
  const auto net = fixture::baseline_network();
  std::ostringstream a, b;
  write_baseline(a, build_baseline(net, {}, 3), net);
  write_baseline(b, build_baseline(net, {}, 3), net);
  EXPECT_EQ(a.str(), b.str());
}
