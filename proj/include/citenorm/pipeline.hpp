#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "citenorm/baseline.hpp"
#include "citenorm/clustering.hpp"
#include "citenorm/common.hpp"
#include "citenorm/leiden.hpp"
#include "citenorm/metrics.hpp"
#include "citenorm/network.hpp"
#include "citenorm/normalize.hpp"

namespace citenorm {

// Raised for invalid configurations; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PipelineConfig {
  std::string dataset = "dataset";
  std::string edges;
  std::string pubs;
  std::vector<std::string> approaches{"unnormalized",     "fractional",           "geometric",
                                      "geometric_limit", "directional_fractional", "directional_geometric"};
  std::vector<double> gammas = default_gammas();
  std::uint64_t seed = 1;
  BaselineThresholds baseline;
  PiaThresholds pia;
  int limit_n = 5;
  std::string out = "out";
  SilhouetteScope silhouette_scope = SilhouetteScope::with_relations;
  int jobs = 1;
  int max_iterations = 10;
  bool has_header = false;
  bool strict = false;

  std::vector<Approach> resolved_approaches() const {
    std::vector<Approach> out;
    for (const auto& name : approaches) {
      try {
        out.push_back(parse_approach(name, limit_n));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    return out;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  if constexpr (std::is_floating_point_v<T>) {
    if (auto v = tsv::parse_real(value)) return static_cast<T>(*v);
  } else {
    if (auto v = tsv::parse_int<T>(value)) return *v;
  }
  throw ConfigError("invalid value '" + value + "' for " + key);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

}  // namespace detail

// Applies one key/value setting. Keys use underscores; dashes are accepted.
inline void apply_setting(PipelineConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '-', '_');
  using detail::parse_number;
  if (key == "dataset") c.dataset = value;
  else if (key == "edges") c.edges = value;
  else if (key == "pubs") c.pubs = value;
  else if (key == "approaches" || key == "approach") c.approaches = detail::split_list(value);
  else if (key == "gammas") {
    c.gammas.clear();
    for (const auto& g : detail::split_list(value)) c.gammas.push_back(parse_number<double>(key, g));
  }
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "min_total_refs") c.baseline.min_total_refs = parse_number<std::int64_t>(key, value);
  else if (key == "min_within_share") c.baseline.min_within_share = parse_number<double>(key, value);
  else if (key == "min_year") c.baseline.min_year = parse_number<int>(key, value);
  else if (key == "overlap") c.baseline.overlap = parse_number<double>(key, value);
  else if (key == "pia_min_relations") c.pia.min_relations = parse_number<std::size_t>(key, value);
  else if (key == "pia_max_within_share") c.pia.max_within_share = parse_number<double>(key, value);
  else if (key == "limit_n") c.limit_n = parse_number<int>(key, value);
  else if (key == "out") c.out = value;
  else if (key == "silhouette_scope") {
    try {
      c.silhouette_scope = parse_silhouette_scope(value);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "jobs") c.jobs = parse_number<int>(key, value);
  else if (key == "max_iterations") c.max_iterations = parse_number<int>(key, value);
  else if (key == "has_header") c.has_header = detail::parse_bool(key, value);
  else if (key == "strict") c.strict = detail::parse_bool(key, value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

// Flat `key = value` lines, `#` starts a comment. Relative input and output
// paths are resolved against `base_dir`.
inline PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {},
                                   PipelineConfig config = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(t.substr(0, eq));
    auto value = detail::trim(t.substr(eq + 1));
    if ((key == "edges" || key == "pubs" || key == "out") && !base_dir.empty() &&
        std::filesystem::path(value).is_relative())
      value = (base_dir / value).lexically_normal().string();
    apply_setting(config, key, value);
  }
  return config;
}

inline PipelineConfig load_config(const std::string& path, PipelineConfig config = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, std::filesystem::path(path).parent_path(), std::move(config));
}

inline void validate(const PipelineConfig& c) {
  if (c.edges.empty() || c.pubs.empty()) throw ConfigError("both edges and pubs inputs are required");
  if (c.limit_n < 1) throw ConfigError("limit_n must be >= 1");
  const auto approaches = c.resolved_approaches();
  if (approaches.empty()) throw ConfigError("no approaches configured");
  if (std::set<Approach>(approaches.begin(), approaches.end()).size() != approaches.size())
    throw ConfigError("duplicate approaches configured");
  if (c.gammas.empty()) throw ConfigError("no gammas configured");
  for (double g : c.gammas)
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("gammas must be positive");
  if (std::set<double>(c.gammas.begin(), c.gammas.end()).size() != c.gammas.size())
    throw ConfigError("duplicate gamma values");
  if (c.baseline.min_total_refs < 0) throw ConfigError("min_total_refs must be >= 0");
  if (!(c.baseline.min_within_share >= 0.0 && c.baseline.min_within_share <= 1.0))
    throw ConfigError("min_within_share must lie in [0, 1]");
  if (c.baseline.min_year < 1800 || c.baseline.min_year > 2100) throw ConfigError("min_year must lie in 1800..2100");
  if (!(c.baseline.overlap > 0.0 && c.baseline.overlap <= 1.0)) throw ConfigError("overlap must lie in (0, 1]");
  if (!(c.pia.max_within_share > 0.0 && c.pia.max_within_share <= 1.0))
    throw ConfigError("pia_max_within_share must lie in (0, 1]");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (c.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (c.out.empty()) throw ConfigError("output directory required");
}

struct EvaluationOptions {
  PiaThresholds pia;
  SilhouetteScope silhouette_scope = SilhouetteScope::with_relations;
};

// All measures for one clustering of `net`. ARI is left empty when there is
// no baseline or the delimited baseline has fewer than two classes;
// silhouette and PIA are empty for single-cluster solutions.
inline EvaluationRecord evaluate_clustering(const CitationNetwork& net, const Clustering& c,
                                            const BaselineClassSet* baseline, const EvaluationOptions& options,
                                            std::vector<std::string>* notes = nullptr) {
  if (c.size() != net.size()) throw Error("clustering does not cover the network");
  EvaluationRecord r;
  r.granularity = granularity(c);
  r.n_clusters = c.cluster_count();
  r.n_publications = c.size();
  r.skewness = cluster_size_skewness(c).value;
  if (baseline && !baseline->assignment.empty()) {
    const auto d = delimit(c, net.ids(), *baseline, net);
    if (d.baseline.cluster_count() >= 2)
      r.ari = adjusted_rand_index(d.clustering, d.baseline);
    else if (notes)
      notes->push_back("ARI missing: fewer than two baseline classes after delimitation");
  } else if (notes) {
    notes->push_back("ARI missing: baseline is empty");
  }
  if (c.cluster_count() >= 2) {
    const auto widths = silhouette_widths(net, c);
    std::vector<double> picked;
    for (NodeIndex i = 0; i < net.size(); ++i)
      if (options.silhouette_scope == SilhouetteScope::all || net.deg(i) > 0) picked.push_back(widths[i]);
    if (!picked.empty()) r.mean_silhouette = mean_of(picked);
    r.pia = pia(net, c, options.pia, widths);
  } else if (notes) {
    notes->push_back("silhouette and PIA missing: single-cluster solution");
  }
  return r;
}

struct GqRow {
  std::string approach;
  double gamma;
  double granularity;
  std::string measure;
  double value;
};

inline constexpr const char* kGqHeader = "approach,gamma,granularity,measure,value";

// Long-format granularity-quality control points, one row per (record,
// measure) in input order. Missing values are skipped and noted.
inline std::vector<GqRow> emit_gq_table(std::span<const EvaluationRecord> records,
                                        std::vector<std::string>* notes = nullptr) {
  std::vector<GqRow> rows;
  for (const auto& r : records) {
    auto add = [&](const char* measure, std::optional<double> v) {
      if (v) {
        rows.push_back({r.approach, r.gamma, r.granularity, measure, *v});
      } else if (notes) {
        notes->push_back(std::string("gq row omitted: ") + r.approach + " gamma=" + format_real(r.gamma, 10) + " " +
                         measure + " missing");
      }
    };
    add("ari", r.ari);
    add("mean_silhouette", r.mean_silhouette);
    add("pia", r.pia ? std::optional<double>(static_cast<double>(*r.pia)) : std::nullopt);
    add("skewness", r.skewness);
  }
  return rows;
}

inline void write_gq_csv(std::ostream& out, std::span<const GqRow> rows) {
  out << kGqHeader << '\n';
  for (const auto& r : rows)
    out << r.approach << ',' << format_real(r.gamma, 10) << ',' << format_real(r.granularity, 10) << ',' << r.measure
        << ',' << format_real(r.value, 10) << '\n';
}

// FNV-1a 64-bit over a file's bytes.
inline std::string content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

inline std::string clustering_file_name(const Approach& a, double gamma) {
  return a.name() + "_gamma" + format_real(gamma, 10) + ".tsv";
}

struct CellOutcome {
  Approach approach;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::optional<EvaluationRecord> record;
  std::string error;
  std::vector<std::string> notes;
};

struct PipelineResult {
  std::vector<EvaluationRecord> records;  // sorted by (approach, gamma descending)
  std::vector<CellOutcome> cells;
  std::vector<std::string> notes;
  int exit_code = 0;  // 0 all cells ok, 1 some cell failed
};

// ingest -> baseline -> (approach x gamma cells: normalize, cluster, evaluate)
// -> results.csv, results_gq.csv, clusterings/, baseline.tsv, manifest.json.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
  validate(config);
  const auto approaches = config.resolved_approaches();
  namespace fs = std::filesystem;

  LoadReport load_report;
  CitationNetwork net;
  try {
    net = load_network_files(config.edges, config.pubs, {config.strict, config.has_header}, &load_report);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const fs::path out_dir(config.out);
  std::error_code ec;
  fs::create_directories(out_dir / "clusterings", ec);
  if (ec) throw ConfigError("cannot create output directory " + config.out + ": " + ec.message());

  SelectionLog selection;
  const BaselineClassSet baseline = build_baseline(net, config.baseline, config.seed, &selection);
  {
    std::ofstream b(out_dir / "baseline.tsv");
    write_baseline(b, baseline, net);
    std::ofstream l(out_dir / "baseline_log.tsv");
    write_selection_log(l, selection);
    std::ofstream d(out_dir / "degrees.csv");
    write_degrees_csv(d, net, config.dataset);
  }

  std::vector<std::optional<WeightedGraph>> graphs(approaches.size());
  std::vector<std::string> graph_errors(approaches.size());
  for (std::size_t a = 0; a < approaches.size(); ++a) {
    try {
      graphs[a] = build_weighted_graph(net, approaches[a]);
    } catch (const std::exception& e) {
      graph_errors[a] = e.what();
    }
  }

  std::vector<CellOutcome> cells;
  for (std::size_t a = 0; a < approaches.size(); ++a)
    for (std::size_t g = 0; g < config.gammas.size(); ++g)
      cells.push_back({approaches[a], config.gammas[g], config.seed ^ g, std::nullopt, {}, {}});

  const EvaluationOptions eval{config.pia, config.silhouette_scope};
  auto run_cell = [&](std::size_t k) {
    CellOutcome& cell = cells[k];
    const std::size_t a = k / config.gammas.size();
    try {
      if (!graphs[a]) throw Error("normalization failed: " + graph_errors[a]);
      const Clustering c = leiden_cluster(*graphs[a], Resolution(cell.gamma), cell.seed, config.max_iterations);
      {
        std::ofstream f(out_dir / "clusterings" / clustering_file_name(cell.approach, cell.gamma));
        if (!f) throw Error("cannot write clustering dump");
        write_clustering(f, c, net.ids());
      }
      EvaluationRecord r = evaluate_clustering(net, c, &baseline, eval, &cell.notes);
      r.dataset = config.dataset;
      r.approach = cell.approach.name();
      r.gamma = cell.gamma;
      cell.record = std::move(r);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), cells.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < cells.size();) run_cell(k);
      });
  }

  PipelineResult result;
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (cells[x].approach != cells[y].approach) return cells[x].approach < cells[y].approach;
    return cells[x].gamma > cells[y].gamma;
  });
  std::size_t failures = 0;
  for (std::size_t k : order) {
    if (cells[k].record)
      result.records.push_back(*cells[k].record);
    else
      ++failures;
    result.cells.push_back(cells[k]);
  }

  {
    std::ofstream f(out_dir / "results.csv");
    write_evaluation_csv(f, result.records);
  }
  std::vector<std::string> gq_notes;
  const auto gq = emit_gq_table(result.records, &gq_notes);
  {
    std::ofstream f(out_dir / "results_gq.csv");
    write_gq_csv(f, gq);
  }
  result.notes = gq_notes;

  nlohmann::json manifest;
  manifest["dataset"] = config.dataset;
  manifest["inputs"]["edges"] = {{"path", config.edges}, {"fnv1a64", content_hash(config.edges)}};
  manifest["inputs"]["pubs"] = {{"path", config.pubs}, {"fnv1a64", content_hash(config.pubs)}};
  std::vector<std::string> names;
  for (const auto& a : approaches) names.push_back(a.name());
  manifest["config"] = {{"approaches", names},
                        {"gammas", config.gammas},
                        {"seed", config.seed},
                        {"limit_n", config.limit_n},
                        {"min_total_refs", config.baseline.min_total_refs},
                        {"min_within_share", config.baseline.min_within_share},
                        {"min_year", config.baseline.min_year},
                        {"overlap", config.baseline.overlap},
                        {"pia_min_relations", config.pia.min_relations},
                        {"pia_max_within_share", config.pia.max_within_share},
                        {"silhouette_scope", to_string(config.silhouette_scope)},
                        {"max_iterations", config.max_iterations},
                        {"has_header", config.has_header},
                        {"strict", config.strict}};
  manifest["network"] = {{"publications", net.size()},
                         {"directed_edges", net.directed_edge_count()},
                         {"relations", net.relation_count()},
                         {"self_loops_dropped", load_report.self_loops_dropped},
                         {"duplicate_edges_collapsed", load_report.duplicate_edges_collapsed},
                         {"missing_publications", load_report.missing_publications}};
  manifest["baseline"] = {{"classes", baseline.classes.size()},
                          {"items", baseline.item_count()},
                          {"selected", selection.selected},
                          {"after_dedupe", selection.after_dedupe}};
  nlohmann::json cell_json = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json j = {{"approach", c.approach.name()},
                        {"gamma", c.gamma},
                        {"seed", c.seed},
                        {"status", c.record ? "ok" : "failed"}};
    if (!c.error.empty()) j["error"] = c.error;
    if (!c.notes.empty()) j["notes"] = c.notes;
    cell_json.push_back(j);
  }
  manifest["cells"] = cell_json;
  manifest["notes"] = result.notes;
  {
    std::ofstream f(out_dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }

  result.exit_code = failures == 0 ? 0 : 1;
  return result;
}

}  // namespace citenorm
