#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "citenorm/pipeline.hpp"
#include "citenorm/synth.hpp"
#include "fixtures.hpp"

using namespace citenorm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("citenorm_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SynthParams p;
    p.block_sizes = {60, 60, 60};
    p.refs_per_node = 5;
    p.review_refs = 40;
    const auto net = generate(p, 3).network;
    std::ofstream e(dir_ / "edges.tsv"), q(dir_ / "pubs.tsv");
    write_edges(e, net);
    write_publications(q, net);
  }
  void TearDown() override { fs::remove_all(dir_); }

  PipelineConfig config(const std::string& out) const {
    PipelineConfig c;
    c.edges = (dir_ / "edges.tsv").string();
    c.pubs = (dir_ / "pubs.tsv").string();
    c.out = (dir_ / out).string();
    c.gammas = {0.05, 0.01};
    return c;
  }

  fs::path dir_;
};

int run_cli(const std::string& args) {
  const int status = std::system((std::string(CITENORM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndRelativePaths) {
  std::istringstream in(
      "# sample\n"
      "dataset = demo\n"
      "edges = data/e.tsv   # trailing comment\n"
      "pubs = /abs/p.tsv\n"
      "approaches = fractional, geometric_limitN\n"
      "limit-n = 7\n"
      "gammas = 0.1, 0.02\n"
      "seed = 9\n"
      "silhouette_scope = all\n"
      "jobs = 3\n"
      "has_header = true\n");
  const auto c = parse_config(in, "/cfg");
  EXPECT_EQ(c.dataset, "demo");
  EXPECT_EQ(c.edges, "/cfg/data/e.tsv");
  EXPECT_EQ(c.pubs, "/abs/p.tsv");
  EXPECT_EQ(c.resolved_approaches(),
            (std::vector<Approach>{Approach::fractional(), Approach::geometric_limit(7)}));
  EXPECT_EQ(c.gammas, (std::vector<double>{0.1, 0.02}));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.silhouette_scope, SilhouetteScope::all);
  EXPECT_EQ(c.jobs, 3);
  EXPECT_TRUE(c.has_header);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, RejectsBadInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("colour = red\n"), ConfigError);
  EXPECT_THROW(parse("seed\n"), ConfigError);
  EXPECT_THROW(parse("seed = -1\n"), ConfigError);
  EXPECT_THROW(parse("gammas = 0.1, x\n"), ConfigError);
  EXPECT_THROW(parse("strict = maybe\n"), ConfigError);
  EXPECT_THROW(parse("silhouette_scope = most\n"), ConfigError);

  PipelineConfig c;
  c.edges = "e";
  c.pubs = "p";
  EXPECT_NO_THROW(validate(c));
  auto invalid = [&](auto mutate) {
    PipelineConfig x = c;
    mutate(x);
    EXPECT_THROW(validate(x), ConfigError);
  };
  invalid([](PipelineConfig& x) { x.edges.clear(); });
  invalid([](PipelineConfig& x) { x.gammas = {0.1, 0.1}; });
  invalid([](PipelineConfig& x) { x.gammas = {0.0}; });
  invalid([](PipelineConfig& x) { x.gammas.clear(); });
  invalid([](PipelineConfig& x) { x.approaches = {"cosine"}; });
  invalid([](PipelineConfig& x) { x.approaches = {"geometric", "geometric"}; });
  invalid([](PipelineConfig& x) { x.limit_n = 0; });
  invalid([](PipelineConfig& x) { x.jobs = 0; });
  invalid([](PipelineConfig& x) { x.baseline.overlap = 0.0; });
  invalid([](PipelineConfig& x) { x.baseline.min_within_share = 1.5; });
}

TEST(Evaluate, MissingMeasuresForDegenerateInputs) {
  const auto net = fixture::baseline_network();
  std::vector<std::string> notes;
  const auto r = evaluate_clustering(net, Clustering::single_cluster(net.size()), nullptr, {}, &notes);
  EXPECT_FALSE(r.ari);
  EXPECT_FALSE(r.mean_silhouette);
  EXPECT_FALSE(r.pia);
  EXPECT_EQ(notes.size(), 2u);
  EXPECT_DOUBLE_EQ(r.granularity, 1.0 / static_cast<double>(net.size()));

  const auto baseline = build_baseline(net, {}, 1);
  const auto s = evaluate_clustering(net, Clustering::singletons(net.size()), &baseline, {});
  ASSERT_TRUE(s.ari);
  EXPECT_EQ(*s.ari, 0.0);
  EXPECT_TRUE(s.mean_silhouette);
  EXPECT_EQ(s.pia, 0u);
}

TEST(GqTable, OneRowPerPresentMeasure) {
  EvaluationRecord a;
  a.approach = "fractional";
  a.gamma = 0.01;
  a.granularity = 0.125;
  a.ari = 0.5;
  a.mean_silhouette = -0.25;
  a.pia = 4;
  a.skewness = 2;
  EvaluationRecord b = a;
  b.ari.reset();
  const std::vector<EvaluationRecord> records{a, b};
  std::vector<std::string> notes;
  const auto rows = emit_gq_table(records, &notes);
  EXPECT_EQ(rows.size(), 7u);
  EXPECT_EQ(notes.size(), 1u);
  std::ostringstream out;
  write_gq_csv(out, std::span<const GqRow>(rows.data(), 4));
  EXPECT_EQ(out.str(),
            "approach,gamma,granularity,measure,value\n"
            "fractional,0.01,0.125,ari,0.5\n"
            "fractional,0.01,0.125,mean_silhouette,-0.25\n"
            "fractional,0.01,0.125,pia,4\n"
            "fractional,0.01,0.125,skewness,2\n");
}

TEST(Names, ClusteringFileName) {
  EXPECT_EQ(clustering_file_name(Approach::geometric_limit(5), 0.0005), "geometric_limit5_gamma0.0005.tsv");
  EXPECT_EQ(clustering_file_name(Approach::fractional(), 0.05), "fractional_gamma0.05.tsv");
}

TEST(Dump, ClustersRankedBySize) {
  const std::vector<std::string> ids{"1", "2", "3", "4", "5"};
  std::ostringstream out;
  write_clustering(out, Clustering{0, 1, 1, 2, 2}, ids);
  EXPECT_EQ(out.str(), "1\t2\n2\t0\n3\t0\n4\t1\n5\t1\n");
  std::istringstream in(out.str());
  const auto back = read_clustering(in, "dump");
  EXPECT_EQ(back.clustering, (Clustering{0, 1, 1, 2, 2}));
}

TEST_F(PipelineTest, WritesAllOutputs) {
  auto c = config("out");
  const auto r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.records.size(), 12u);
  for (const char* f : {"results.csv", "results_gq.csv", "manifest.json", "baseline.tsv", "baseline_log.tsv",
                        "degrees.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "out" / "clusterings"), fs::directory_iterator{}), 12);
  const auto results = slurp(dir_ / "out" / "results.csv");
  EXPECT_EQ(results.substr(0, results.find('\n')), kEvaluationHeader);
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 13);
  // Sorted by approach order, then decreasing gamma.
  EXPECT_EQ(r.records[0].approach, "unnormalized");
  EXPECT_EQ(r.records[0].gamma, 0.05);
  EXPECT_EQ(r.records[1].gamma, 0.01);
  EXPECT_EQ(r.records[11].approach, "directional_geometric");
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["inputs"]["edges"]["fnv1a64"], content_hash(c.edges));
  EXPECT_EQ(manifest["cells"].size(), 12u);
}

TEST_F(PipelineTest, ParallelRunMatchesSerial) {
  auto serial = config("serial");
  auto parallel = config("parallel");
  parallel.jobs = 4;
  run_pipeline(serial);
  run_pipeline(parallel);
  EXPECT_EQ(slurp(dir_ / "serial" / "results.csv"), slurp(dir_ / "parallel" / "results.csv"));
  for (const auto& entry : fs::directory_iterator(dir_ / "serial" / "clusterings"))
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "parallel" / "clusterings" / entry.path().filename()));
}

TEST_F(PipelineTest, MissingInputIsConfigError) {
  auto c = config("out");
  c.edges = (dir_ / "absent.tsv").string();
  EXPECT_THROW(run_pipeline(c), ConfigError);
}

TEST_F(PipelineTest, ContentHashIsFnv1a) {
  std::ofstream(dir_ / "a.txt") << "a";
  EXPECT_EQ(content_hash((dir_ / "a.txt").string()), "af63dc4c8601ec8c");
  std::ofstream(dir_ / "empty.txt");
  EXPECT_EQ(content_hash((dir_ / "empty.txt").string()), "cbf29ce484222325");
}

TEST_F(PipelineTest, CliExitCodes) {
  const std::string e = (dir_ / "edges.tsv").string(), p = (dir_ / "pubs.tsv").string();
  EXPECT_EQ(run_cli("run --edges " + e + " --pubs " + p + " --gammas 0.05 --out " + (dir_ / "cli").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "cli" / "results.csv"));
  EXPECT_EQ(run_cli("run --edges " + e + " --pubs " + p + " --gammas 0.05,0.05 --out " + (dir_ / "x").string()), 2);
  EXPECT_EQ(run_cli("run --edges " + (dir_ / "nope").string() + " --pubs " + p + " --out " + (dir_ / "x").string()),
            2);
  EXPECT_EQ(run_cli("run --config " + (dir_ / "nope.cfg").string()), 2);
  EXPECT_EQ(run_cli("cluster --edges " + e + " --pubs " + p + " --approach cosine --gammas 0.05"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST_F(PipelineTest, CliSubcommandsProduceFiles) {
  const std::string e = (dir_ / "edges.tsv").string(), p = (dir_ / "pubs.tsv").string();
  const std::string in = " --edges " + e + " --pubs " + p;
  EXPECT_EQ(run_cli("ingest" + in + " --out " + (dir_ / "ingest").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "ingest" / "degrees.csv"));
  EXPECT_EQ(run_cli("normalize" + in + " --approach geometric --out " + (dir_ / "norm").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "norm" / "geometric.tsv"));
  EXPECT_EQ(run_cli("cluster" + in + " --approach fractional --gammas 0.01 --out " + (dir_ / "cl").string()), 0);
  const auto dump = dir_ / "cl" / "fractional_gamma0.01.tsv";
  EXPECT_TRUE(fs::exists(dump));
  EXPECT_EQ(run_cli("baseline" + in + " --out " + (dir_ / "bl").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "bl" / "baseline.tsv"));
  EXPECT_EQ(run_cli("evaluate" + in + " --clustering " + dump.string() + " --out " + (dir_ / "ev").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "ev" / "results.csv"));
  EXPECT_EQ(run_cli("synth --blocks 30,30 --refs 4 --review-refs 20 --hubs 2 --hub-out-degree 20 --out " +
                    (dir_ / "syn").string()),
            0);
  for (const char* f : {"edges.tsv", "pubs.tsv", "planted.tsv"}) EXPECT_TRUE(fs::exists(dir_ / "syn" / f)) << f;
}
