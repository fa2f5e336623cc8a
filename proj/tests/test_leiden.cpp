#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "citenorm/leiden.hpp"
#include "oracles.hpp"

using namespace citenorm;

namespace {

WeightedGraph two_triangles() {
  std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}, {2, 3, 1}};
  return WeightedGraph::from_edges(6, e);
}

WeightedGraph permuted(const WeightedGraph& g, const std::vector<NodeIndex>& perm) {
  std::vector<WeightedEdge> e;
  for (const auto& x : g.edges()) e.push_back({perm[x.a], perm[x.b], x.weight});
  return WeightedGraph::from_edges(g.size(), e);
}

}  // namespace

TEST(Resolution, RejectsNonPositive) {
  EXPECT_THROW(Resolution(0.0), Error);
  EXPECT_THROW(Resolution(-1.0), Error);
  EXPECT_THROW(Resolution(std::numeric_limits<double>::infinity()), Error);
  EXPECT_DOUBLE_EQ(Resolution(0.25).value(), 0.25);
}

TEST(Cpm, TwoTriangles) {
  const auto g = two_triangles();
  const Resolution gamma(0.5);
  EXPECT_DOUBLE_EQ(cpm_quality(g, Clustering{0, 0, 0, 1, 1, 1}, gamma), 3.0);
  EXPECT_DOUBLE_EQ(cpm_quality(g, Clustering::single_cluster(6), gamma), -0.5);
  EXPECT_DOUBLE_EQ(cpm_quality(g, Clustering::singletons(6), gamma), 0.0);
  const auto r = leiden(g, gamma, {3});
  EXPECT_EQ(r.clustering, (Clustering{0, 0, 0, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.quality_trace.back(), 3.0);
}

TEST(Cpm, MatchesDenseOracle) {
  SplitMix64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto g = oracle::random_connected_graph(12, 0.3, 100 + t);
    const Clustering c(oracle::random_labels(12, 4, rng));
    EXPECT_NEAR(cpm_quality(g, c, Resolution(0.3)), oracle::cpm_dense(oracle::dense_weights(g), c.labels(), 0.3),
                1e-12);
  }
}

TEST(Leiden, ReachesExhaustiveOptimumOnSmallGraphs) {
  std::size_t checked = 0;
  for (std::size_t n = 2; n <= 8; ++n)
    for (int t = 0; t < 12; ++t)
      for (double gamma : {0.05, 0.2, 0.5}) {
        const auto g = oracle::random_connected_graph(n, 0.35, n * 1000 + t);
        if (!oracle::local_optima_are_global(g, gamma)) continue;
        ++checked;
        const auto r = leiden(g, Resolution(gamma), {static_cast<std::uint64_t>(t)});
        EXPECT_NEAR(r.quality_trace.back(), oracle::best_cpm(g, gamma), 1e-9)
            << "n=" << n << " t=" << t << " gamma=" << gamma;
      }
  EXPECT_GT(checked, 150u);
}

TEST(Leiden, PathOfFourIsALocalOptimumTrap) {
  // At gamma 0.8 the middle pair {1,2} admits no improving single move, yet
  // the two end pairs score higher. Leiden returns a local optimum.
  std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
  const auto g = WeightedGraph::from_edges(4, e);
  EXPECT_FALSE(oracle::local_optima_are_global(g, 0.8));
  EXPECT_NEAR(oracle::best_cpm(g, 0.8), 0.4, 1e-12);
  EXPECT_LE(oracle::best_single_move_gain(g, Clustering{0, 1, 1, 2}, 0.8), 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = leiden_cluster(g, Resolution(0.8), seed);
    EXPECT_LE(oracle::best_single_move_gain(g, c, 0.8), 1e-12);
  }
}

TEST(Leiden, SmallGraphsEndLocallyOptimal) {
  for (std::size_t n = 2; n <= 8; ++n)
    for (int t = 0; t < 12; ++t)
      for (double gamma : {0.05, 0.2, 0.5, 0.8}) {
        const auto g = oracle::random_connected_graph(n, 0.35, n * 1000 + t, t % 2 == 0);
        const auto r = leiden(g, Resolution(gamma), {static_cast<std::uint64_t>(t)});
        EXPECT_LE(oracle::best_single_move_gain(g, r.clustering, gamma), 1e-12)
            << "n=" << n << " t=" << t << " gamma=" << gamma;
        EXPECT_TRUE(oracle::clusters_connected(g, r.clustering));
      }
}

TEST(Leiden, ClustersAreConnected) {
  for (int t = 0; t < 30; ++t) {
    const auto g = oracle::random_connected_graph(80, 0.04, 500 + t);
    for (double gamma : {0.01, 0.1, 0.4}) {
      const auto c = leiden_cluster(g, Resolution(gamma), t);
      EXPECT_TRUE(oracle::clusters_connected(g, c));
    }
  }
}

TEST(Leiden, DisconnectedInputNeverMerged) {
  std::vector<WeightedEdge> e{{0, 1, 1}, {2, 3, 1}};
  const auto g = WeightedGraph::from_edges(5, e);
  const auto c = leiden_cluster(g, Resolution(0.01), 1);
  EXPECT_EQ(c, (Clustering{0, 0, 1, 1, 2}));
}

TEST(Leiden, QualityNonDecreasingAndTraceConsistent) {
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_connected_graph(150, 0.03, 900 + t);
    const auto r = leiden(g, Resolution(0.05), {static_cast<std::uint64_t>(t)});
    ASSERT_GE(r.quality_trace.size(), 2u);
    EXPECT_DOUBLE_EQ(r.quality_trace.front(), 0.0);
    for (std::size_t k = 1; k < r.quality_trace.size(); ++k)
      EXPECT_GE(r.quality_trace[k], r.quality_trace[k - 1] - 1e-9);
    EXPECT_NEAR(r.quality_trace.back(), cpm_quality(g, r.clustering, Resolution(0.05)), 1e-9);
    EXPECT_LE(r.iterations, 10);
  }
}

TEST(Leiden, LocallyOptimalForSingleMoves) {
  for (int t = 0; t < 10; ++t) {
    const auto g = oracle::random_connected_graph(40, 0.1, 1300 + t);
    const auto r = leiden(g, Resolution(0.1), {static_cast<std::uint64_t>(t)});
    if (!r.converged) continue;
    EXPECT_LE(oracle::best_single_move_gain(g, r.clustering, 0.1), 1e-9);
  }
}

TEST(Leiden, SameSeedSamePartition) {
  const auto g = oracle::random_connected_graph(300, 0.02, 77);
  for (std::uint64_t seed : {0ULL, 1ULL, 123456789ULL}) {
    const auto a = leiden(g, Resolution(0.02), {seed});
    const auto b = leiden(g, Resolution(0.02), {seed});
    EXPECT_EQ(a.clustering.labels(), b.clustering.labels());
    EXPECT_EQ(a.quality_trace, b.quality_trace);
  }
}

TEST(Leiden, PermutationEquivariantOnClearOptimum) {
  // Four dense cliques joined by single light edges.
  std::vector<WeightedEdge> e;
  for (NodeIndex b = 0; b < 4; ++b) {
    for (NodeIndex i = 0; i < 6; ++i)
      for (NodeIndex j = i + 1; j < 6; ++j) e.push_back({b * 6 + i, b * 6 + j, 1.0});
    e.push_back({b * 6, ((b + 1) % 4) * 6 + 1, 0.1});
  }
  const auto g = WeightedGraph::from_edges(24, e);
  const auto base = leiden_cluster(g, Resolution(0.3), 1);
  EXPECT_EQ(base.cluster_count(), 4u);
  SplitMix64 rng(4);
  for (int t = 0; t < 10; ++t) {
    std::vector<NodeIndex> perm(24);
    std::iota(perm.begin(), perm.end(), NodeIndex{0});
    rng.shuffle(perm);
    const auto c = leiden_cluster(permuted(g, perm), Resolution(0.3), t);
    std::vector<ClusterLabel> back(24);
    for (NodeIndex v = 0; v < 24; ++v) back[v] = c[perm[v]];
    EXPECT_EQ(Clustering(back), base);
  }
}

TEST(Leiden, ExtremeResolutions) {
  const auto g = oracle::random_connected_graph(30, 0.2, 3, true);
  // Above the heaviest edge no pair gains from merging.
  EXPECT_EQ(leiden_cluster(g, Resolution(1.5), 1).cluster_count(), 30u);
  // Tiny gamma on a connected graph: everything merges.
  EXPECT_EQ(leiden_cluster(g, Resolution(1e-6), 1).cluster_count(), 1u);
}

TEST(Leiden, EmptyAndEdgelessGraphs) {
  const auto empty = WeightedGraph::from_edges(0, {});
  EXPECT_EQ(leiden_cluster(empty, Resolution(0.1), 1).size(), 0u);
  const auto isolated = WeightedGraph::from_edges(4, {});
  EXPECT_EQ(leiden_cluster(isolated, Resolution(0.1), 1), Clustering::singletons(4));
}

TEST(Sweep, SeedsEachGammaAndRejectsDuplicates) {
  const auto g = oracle::random_connected_graph(100, 0.05, 8);
  const auto gammas = default_gammas();
  const auto sweep = resolution_sweep(g, gammas, 42);
  ASSERT_EQ(sweep.size(), gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    EXPECT_EQ(sweep[i].gamma, gammas[i]);
    EXPECT_EQ(sweep[i].clustering, leiden_cluster(g, Resolution(gammas[i]), 42 ^ i));
  }
  const std::vector<double> dup{0.1, 0.1};
  EXPECT_THROW(resolution_sweep(g, dup, 1), Error);
  EXPECT_THROW(resolution_sweep(g, {}, 1), Error);
}

TEST(Sweep, CoarserAtLowerResolution) {
  const auto g = oracle::random_connected_graph(200, 0.03, 21);
  const auto sweep = resolution_sweep(g, default_gammas(), 5);
  EXPECT_LE(sweep.back().clustering.cluster_count(), sweep.front().clustering.cluster_count());
}
