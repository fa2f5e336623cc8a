// citenorm: command-line driver for the citation clustering toolkit.
//
// Exit codes: 0 success, 1 some approach x gamma cell failed, 2 invalid
// configuration or unreadable/unparsable input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citenorm/citenorm.hpp"

namespace fs = std::filesystem;
using namespace citenorm;

namespace {

struct InputFlags {
  std::string edges, pubs, dataset = "dataset";
  bool has_header = false;
  bool strict = false;
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
  cmd->add_option("--edges", in.edges, "citation edges TSV (citing_id, cited_id)")->required();
  cmd->add_option("--pubs", in.pubs, "publications TSV (id, year, total_reference_count)")->required();
  cmd->add_option("--dataset", in.dataset, "dataset name used in CSV outputs");
  cmd->add_flag("--has-header", in.has_header, "skip the first row of both inputs");
  cmd->add_flag("--strict", in.strict, "reject edges naming unknown publications");
}

CitationNetwork load(const InputFlags& in, LoadReport* report = nullptr) {
  return load_network_files(in.edges, in.pubs, {in.strict, in.has_header}, report);
}

fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out + ": " + ec.message());
  return fs::path(out);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

std::vector<Approach> resolve(const std::vector<std::string>& names, int limit) {
  std::vector<Approach> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_approach(n, limit));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) out = all_approaches(limit);
  return out;
}

void check_gammas(const std::vector<double>& gammas) {
  PipelineConfig probe;
  probe.edges = probe.pubs = "-";
  probe.gammas = gammas;
  validate(probe);
}

void print_report(const CitationNetwork& net, const LoadReport& r) {
  std::cerr << "publications " << net.size() << ", citations " << net.directed_edge_count() << ", relations "
            << net.relation_count() << "\n";
  if (r.self_loops_dropped) std::cerr << "dropped " << r.self_loops_dropped << " self-citations\n";
  if (r.duplicate_edges_collapsed) std::cerr << "collapsed " << r.duplicate_edges_collapsed << " duplicate edges\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

// "<approach>_gamma<g>.tsv" -> (approach, g); anything else -> (stem, 0).
std::pair<std::string, double> describe_dump(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto at = stem.rfind("_gamma");
  if (at != std::string::npos)
    if (auto g = tsv::parse_real(std::string_view(stem).substr(at + 6))) return {stem.substr(0, at), *g};
  return {stem, 0.0};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized citation-network clustering and evaluation"};
  app.require_subcommand(1);

  InputFlags in;
  std::string out = "out";
  std::vector<std::string> approach_names;
  std::vector<double> gammas = default_gammas();
  int limit_n = 5;
  std::uint64_t seed = 1;
  int max_iterations = 10;

  auto* ingest = app.add_subcommand("ingest", "load, clean and summarize a citation network");
  add_input_flags(ingest, in);
  ingest->add_option("--out", out, "output directory");

  auto* normalize = app.add_subcommand("normalize", "write weighted relation lists");
  add_input_flags(normalize, in);
  normalize->add_option("--approach", approach_names, "approaches (default: all six)")->delimiter(',');
  normalize->add_option("--limit-n", limit_n, "degree floor of geometric_limit");
  normalize->add_option("--out", out, "output directory");

  auto* cluster = app.add_subcommand("cluster", "Leiden/CPM clustering over a resolution sweep");
  add_input_flags(cluster, in);
  cluster->add_option("--approach", approach_names, "approaches (default: all six)")->delimiter(',');
  cluster->add_option("--limit-n", limit_n, "degree floor of geometric_limit");
  cluster->add_option("--gammas", gammas, "resolution values")->delimiter(',');
  cluster->add_option("--seed", seed, "random seed; the i-th gamma uses seed ^ i");
  cluster->add_option("--max-iterations", max_iterations, "Leiden iterations per run");
  cluster->add_option("--out", out, "output directory");

  BaselineThresholds thresholds;
  auto add_baseline_flags = [&](CLI::App* cmd) {
    cmd->add_option("--min-total-refs", thresholds.min_total_refs, "class publications need more references");
    cmd->add_option("--min-within-share", thresholds.min_within_share, "minimum within-dataset reference share");
    cmd->add_option("--min-year", thresholds.min_year, "earliest publication year of a class publication");
    cmd->add_option("--overlap", thresholds.overlap, "coupling overlap that marks classes as one topic");
  };
  auto* baseline = app.add_subcommand("baseline", "build the reference-list baseline classes");
  add_input_flags(baseline, in);
  add_baseline_flags(baseline);
  baseline->add_option("--seed", seed, "random seed for same-topic deduplication");
  baseline->add_option("--out", out, "output directory");

  std::vector<std::string> dumps;
  std::string scope = "with-relations";
  PiaThresholds pia_t;
  auto* evaluate = app.add_subcommand("evaluate", "score clustering dumps");
  add_input_flags(evaluate, in);
  add_baseline_flags(evaluate);
  evaluate->add_option("--clustering", dumps, "clustering dump(s): pub_id <TAB> cluster_id")->required();
  evaluate->add_option("--seed", seed, "random seed for same-topic deduplication");
  evaluate->add_option("--silhouette-scope", scope, "with-relations or all");
  evaluate->add_option("--pia-min-relations", pia_t.min_relations, "PIA degree threshold");
  evaluate->add_option("--pia-max-within-share", pia_t.max_within_share, "PIA within-cluster share bound");
  evaluate->add_option("--out", out, "output directory");

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "full pipeline from a config file and/or flags");
  run->add_option("--config", config_path, "key = value config file");
  auto* r_edges = run->add_option("--edges", in.edges);
  auto* r_pubs = run->add_option("--pubs", in.pubs);
  auto* r_dataset = run->add_option("--dataset", in.dataset);
  auto* r_header = run->add_flag("--has-header", in.has_header);
  auto* r_strict = run->add_flag("--strict", in.strict);
  auto* r_approach = run->add_option("--approach", approach_names)->delimiter(',');
  auto* r_gammas = run->add_option("--gammas", gammas)->delimiter(',');
  auto* r_limit = run->add_option("--limit-n", limit_n);
  auto* r_seed = run->add_option("--seed", seed);
  int jobs = 1;
  auto* r_jobs = run->add_option("--jobs", jobs, "parallel cells");
  auto* r_iter = run->add_option("--max-iterations", max_iterations);
  auto* r_scope = run->add_option("--silhouette-scope", scope);
  auto* r_out = run->add_option("--out", out);

  SynthParams sp;
  std::size_t hubs = 0, hub_out_degree = 100;
  std::uint64_t hub_seed = 0;
  bool hub_seed_set = false;
  auto* synth = app.add_subcommand("synth", "generate a planted-partition citation network");
  synth->add_option("--blocks", sp.block_sizes, "block sizes")->delimiter(',');
  synth->add_option("--refs", sp.refs_per_node, "mean references per publication");
  synth->add_option("--mixing", sp.mixing, "share of references leaving the block");
  synth->add_option("--attachment-exponent", sp.attachment_exponent, "preferential attachment exponent");
  synth->add_option("--hub-fraction", sp.hub_fraction, "share of boosted publications");
  synth->add_option("--hub-boost", sp.hub_boost, "attractiveness multiplier of boosted publications");
  synth->add_option("--reviews-per-block", sp.reviews_per_block, "reference-rich recent publications per block");
  synth->add_option("--review-refs", sp.review_refs, "references of each review");
  synth->add_option("--hubs", hubs, "hub/partner pairs added after generation");
  synth->add_option("--hub-out-degree", hub_out_degree, "references of each hub");
  synth->add_option("--hub-seed", hub_seed, "seed for hub placement (default: seed + 100)")
      ->each([&](const std::string&) { hub_seed_set = true; });
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      LoadReport report;
      const auto net = load(in, &report);
      print_report(net, report);
      const auto dir = prepare_out(out);
      auto e = open_out(dir / "edges.tsv");
      write_edges(e, net);
      auto p = open_out(dir / "pubs.tsv");
      write_publications(p, net);
      auto d = open_out(dir / "degrees.csv");
      write_degrees_csv(d, net, in.dataset);
      return 0;
    }

    if (*normalize) {
      const auto approaches = resolve(approach_names, limit_n);
      const auto net = load(in);
      const auto dir = prepare_out(out);
      for (const auto& a : approaches) {
        auto f = open_out(dir / (a.name() + ".tsv"));
        write_weighted_edges(f, build_weighted_graph(net, a));
      }
      return 0;
    }

    if (*cluster) {
      const auto approaches = resolve(approach_names, limit_n);
      check_gammas(gammas);
      if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
      const auto net = load(in);
      const auto dir = prepare_out(out);
      for (const auto& a : approaches) {
        const auto g = build_weighted_graph(net, a);
        for (const auto& entry : resolution_sweep(g, gammas, seed, max_iterations)) {
          auto f = open_out(dir / clustering_file_name(a, entry.gamma));
          write_clustering(f, entry.clustering, net.ids());
          std::cerr << a.name() << " gamma=" << format_real(entry.gamma, 10) << ": "
                    << entry.clustering.cluster_count() << " clusters\n";
        }
      }
      return 0;
    }

    if (*baseline) {
      const auto net = load(in);
      SelectionLog log;
      const auto set = build_baseline(net, thresholds, seed, &log);
      const auto dir = prepare_out(out);
      auto b = open_out(dir / "baseline.tsv");
      write_baseline(b, set, net);
      auto l = open_out(dir / "baseline_log.tsv");
      write_selection_log(l, log);
      std::cerr << set.classes.size() << " classes over " << set.item_count() << " publications\n";
      return 0;
    }

    if (*evaluate) {
      EvaluationOptions options;
      options.pia = pia_t;
      try {
        options.silhouette_scope = parse_silhouette_scope(scope);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      const auto net = load(in);
      const auto set = build_baseline(net, thresholds, seed);
      std::vector<EvaluationRecord> records;
      for (const auto& path : dumps) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open clustering " + path);
        const auto dump = read_clustering(f, path);
        if (dump.ids.size() != net.size()) throw ConfigError(path + " does not cover every publication");
        std::vector<ClusterLabel> labels(net.size());
        for (std::size_t k = 0; k < dump.ids.size(); ++k) {
          const auto v = net.find(dump.ids[k]);
          if (!v) throw ConfigError(path + ": unknown publication " + dump.ids[k]);
          labels[*v] = dump.clustering[k];
        }
        std::vector<std::string> notes;
        auto r = evaluate_clustering(net, Clustering(std::move(labels)), &set, options, &notes);
        std::tie(r.approach, r.gamma) = describe_dump(path);
        r.dataset = in.dataset;
        for (const auto& n : notes) std::cerr << path << ": " << n << "\n";
        records.push_back(std::move(r));
      }
      const auto dir = prepare_out(out);
      auto f = open_out(dir / "results.csv");
      write_evaluation_csv(f, records);
      return 0;
    }

    if (*run) {
      PipelineConfig config;
      if (!config_path.empty()) config = load_config(config_path);
      auto set = [&](CLI::Option* opt, const std::string& key, const std::string& value) {
        if (opt->count()) apply_setting(config, key, value);
      };
      set(r_edges, "edges", in.edges);
      set(r_pubs, "pubs", in.pubs);
      set(r_dataset, "dataset", in.dataset);
      if (r_header->count()) config.has_header = in.has_header;
      if (r_strict->count()) config.strict = in.strict;
      if (r_approach->count()) config.approaches = approach_names;
      if (r_gammas->count()) config.gammas = gammas;
      if (r_limit->count()) config.limit_n = limit_n;
      if (r_seed->count()) config.seed = seed;
      if (r_jobs->count()) config.jobs = jobs;
      if (r_iter->count()) config.max_iterations = max_iterations;
      set(r_scope, "silhouette_scope", scope);
      set(r_out, "out", out);

      const auto result = run_pipeline(config);
      for (const auto& c : result.cells)
        if (!c.error.empty())
          std::cerr << "cell " << c.approach.name() << " gamma=" << format_real(c.gamma, 10) << " failed: " << c.error
                    << "\n";
      std::cerr << result.records.size() << " of " << result.cells.size() << " cells written to " << config.out
                << "\n";
      return result.exit_code;
    }

    if (*synth) {
      auto planted = generate(sp, seed);
      if (hubs > 0) planted = hubify(planted, hubs, hub_out_degree, hub_seed_set ? hub_seed : seed + 100);
      const auto dir = prepare_out(out);
      auto e = open_out(dir / "edges.tsv");
      write_edges(e, planted.network);
      auto p = open_out(dir / "pubs.tsv");
      write_publications(p, planted.network);
      auto l = open_out(dir / "planted.tsv");
      write_planted(l, planted);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
