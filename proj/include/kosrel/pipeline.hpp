#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kosrel/article_nodes.hpp"
#include "kosrel/aspect.hpp"
#include "kosrel/citegraph.hpp"
#include "kosrel/config.hpp"
#include "kosrel/corpus.hpp"
#include "kosrel/error.hpp"
#include "kosrel/evaluate.hpp"
#include "kosrel/fusion.hpp"
#include "kosrel/graphmetrics.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/infometrics.hpp"
#include "kosrel/parallel.hpp"
#include "kosrel/propagate.hpp"
#include "kosrel/svg_plot.hpp"
#include "kosrel/synthgen.hpp"

namespace kosrel::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::ifstream open_input(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(std::string("no ") + what + " file configured");
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + std::string(what) + " file " + p.string());
  return in;
}

inline std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

/// Files are written below a staging directory and moved into the output
/// directory by commit(). Without commit the staging area is removed.
class StagedOutput {
 public:
  StagedOutput(fs::path out_dir, const std::string& stage, std::vector<std::string> entries)
      : out_dir_(std::move(out_dir)), staging_(out_dir_ / (".staging-" + stage)), entries_(std::move(entries)) {
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }

  const fs::path& dir() const noexcept { return staging_; }

  void commit() {
    for (const auto& e : entries_) {
      fs::remove_all(out_dir_ / e);
      if (fs::exists(staging_ / e)) fs::rename(staging_ / e, out_dir_ / e);
    }
    fs::remove_all(staging_);
    committed_ = true;
  }

 private:
  fs::path out_dir_;
  fs::path staging_;
  std::vector<std::string> entries_;
  bool committed_ = false;
};

inline std::string hash_comment(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

// ---------------------------------------------------------------------------
// Inputs

struct Inputs {
  Hierarchy hierarchy;
  std::size_t auto_created_codes = 0;
  ArticleStore store;
  std::vector<Edge> edges;
  std::optional<std::vector<ChangeRecord>> changes;
};

inline Inputs load_inputs(const PipelineConfig& cfg) {
  Inputs in;
  auto wrap = [](const fs::path& p, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError& e) {
      throw Error(p.string() + ": " + e.what());
    }
  };
  {
    auto s = open_input(cfg.hierarchy_path, "hierarchy");
    auto r = wrap(cfg.hierarchy_path, [&] { return parse_hierarchy(s); });
    in.hierarchy = std::move(r.hierarchy);
    in.auto_created_codes = r.auto_created;
  }
  {
    auto s = open_input(cfg.articles_path, "articles");
    in.store = wrap(cfg.articles_path, [&] { return parse_articles(s); });
  }
  {
    auto s = open_input(cfg.citations_path, "citations");
    in.edges = wrap(cfg.citations_path, [&] { return parse_citations(s); });
  }
  if (!cfg.changes_path.empty()) {
    auto s = open_input(cfg.changes_path, "changes");
    in.changes = wrap(cfg.changes_path, [&] { return parse_changes(s); });
  }
  return in;
}

/// Fingerprint of every output-shaping parameter and the input contents.
inline std::string config_hash(const PipelineConfig& cfg) {
  Fnv1a h;
  h.update(cfg.canonical_parameters());
  for (const auto* p : {&cfg.hierarchy_path, &cfg.articles_path, &cfg.citations_path, &cfg.changes_path}) {
    if (p->empty()) {
      h.update("<none>\n");
      continue;
    }
    h.update(read_file(*p));
    h.update("\n--\n");
  }
  return h.hex();
}

// ---------------------------------------------------------------------------
// ingest

struct IngestReport {
  std::size_t hierarchy_nodes = 0;
  int hierarchy_levels = 0;
  std::size_t descriptors = 0;
  std::size_t auto_created_codes = 0;
  std::size_t articles = 0;
  std::size_t retracted = 0;
  std::optional<Month> first_month, last_month;
  std::size_t citation_rows = 0;
  std::size_t edges = 0;
  GraphBuildStats dropped;
  std::size_t unknown_descriptors = 0;
  std::optional<std::size_t> change_records;
};

inline json to_json(const IngestReport& r) {
  json j = {{"hierarchy_nodes", r.hierarchy_nodes},
            {"hierarchy_levels", r.hierarchy_levels},
            {"descriptors", r.descriptors},
            {"auto_created_codes", r.auto_created_codes},
            {"articles", r.articles},
            {"retracted", r.retracted},
            {"citation_rows", r.citation_rows},
            {"edges", r.edges},
            {"dropped_self_loops", r.dropped.self_loops},
            {"dropped_unknown_endpoints", r.dropped.unknown_endpoints},
            {"dropped_duplicates", r.dropped.duplicates},
            {"unknown_descriptors", r.unknown_descriptors}};
  j["first_month"] = r.first_month ? json(r.first_month->str()) : json(nullptr);
  j["last_month"] = r.last_month ? json(r.last_month->str()) : json(nullptr);
  j["change_records"] = r.change_records ? json(*r.change_records) : json(nullptr);
  return j;
}

inline IngestReport ingest(const PipelineConfig& cfg) {
  cfg.validate();
  const auto in = load_inputs(cfg);
  IngestReport r;
  r.hierarchy_nodes = in.hierarchy.size();
  r.hierarchy_levels = in.hierarchy.max_level();
  r.descriptors = in.hierarchy.descriptor_map().size();
  r.auto_created_codes = in.auto_created_codes;
  r.articles = in.store.size();
  r.retracted = in.store.retracted_ids().size();
  if (!in.store.by_month().empty()) {
    r.first_month = in.store.by_month().begin()->first;
    r.last_month = in.store.by_month().rbegin()->first;
  }
  r.citation_rows = in.edges.size();
  const auto g = build_graph(in.edges, in.store);
  r.edges = g.edge_count();
  r.dropped = g.build_stats();
  r.unknown_descriptors = ArticleNodeIndex(in.store, in.hierarchy).unknown_descriptors();
  if (in.changes) r.change_records = in.changes->size();
  return r;
}

// ---------------------------------------------------------------------------
// compute

inline std::string scores_file(Aspect a, const Month& m) {
  return "scores/" + std::string(aspect_name(a)) + "_" + m.str() + ".csv";
}
inline std::string sample_file(const Month& m) { return "samples/sample_" + m.str() + ".txt"; }
inline std::string rankings_file(const Month& m) { return "rankings/rankings_" + m.str() + ".csv"; }

struct MonthResult {
  Month month;
  std::uint64_t seed = 0;
  std::size_t snapshot_nodes = 0, snapshot_edges = 0;
  std::size_t sampled_nodes = 0, sampled_edges = 0;
  std::size_t month_articles = 0;
  bool pagerank_converged = true;
  int pagerank_iterations = 0;
  std::array<AspectScores, 4> scores;  // in kAspects order
  std::vector<ArticleId> sampled_ids;
  ArticleScores disruption, influence;
};

/// Graph aspect for every hierarchy node; nodes without a propagated value get 0.
inline AspectScores graph_aspect(const Hierarchy& h, const ArticleScores& article_scores,
                                 const ArticleNodeIndex& mapping, Aspect aspect, Month month) {
  NodeSeedScores seeds;
  if (article_scores.graph_size_m > 0) seeds = aggregate_to_nodes(article_scores, mapping, h);
  auto propagated = propagate(h, seeds);
  AspectScores out{aspect, month, {}};
  for (const auto& code : h.nodes()) {
    auto it = propagated.find(code);
    out.values.emplace_hint(out.values.end(), code, it == propagated.end() ? 0.0 : it->second);
  }
  return out;
}

/// One month: cumulative snapshot -> seeded sample -> disruption and
/// PageRank -> aggregation -> propagation; information metrics from the
/// month's own articles with direct upward propagation.
inline MonthResult compute_month(const PipelineConfig& cfg, const Inputs& in, const CitationGraph& full,
                                 const ArticleNodeIndex& mapping, const Month& month, std::size_t month_index,
                                 unsigned threads) {
  const auto& h = in.hierarchy;
  MonthResult r;
  r.month = month;
  r.seed = cfg.base_seed + month_index;

  const auto snapshot = cumulative_snapshot(full, in.store, month);
  r.snapshot_nodes = snapshot.node_count();
  r.snapshot_edges = snapshot.edge_count();
  const auto sample = sample_nodes(snapshot, cfg.sample_fraction, r.seed);
  r.sampled_nodes = sample.node_count();
  r.sampled_edges = sample.edge_count();
  r.sampled_ids.assign(sample.ids().begin(), sample.ids().end());

  r.disruption = disruption_all(sample, threads);
  auto pr = pagerank(sample, cfg.pagerank, threads);
  r.pagerank_converged = pr.converged;
  r.pagerank_iterations = pr.iterations;
  r.influence = std::move(pr.scores);

  r.scores[0] = graph_aspect(h, r.disruption, mapping, Aspect::disruptiveness, month);
  r.scores[1] = graph_aspect(h, r.influence, mapping, Aspect::influence, month);

  NodeSets sets;
  for (auto id : in.store.articles_in_month(month)) {
    auto nodes = mapping.nodes_of(id);
    sets.emplace_back(nodes.begin(), nodes.end());
  }
  r.month_articles = sets.size();
  r.scores[2] = informativeness(h, mapping_counts(h, sets), cfg.informativeness_mode, month);
  r.scores[3] = usefulness(h, mapping_matrix(h, sets), month);
  return r;
}

inline void write_article_scores(std::ostream& out, const ArticleScores& s, std::string_view metric,
                                 const Month& month, const std::string& hash) {
  out << hash_comment(hash) << "article_id,metric,month,value\n";
  const auto m = month.str();
  for (std::size_t i = 0; i < s.ids.size(); ++i)
    out << s.ids[i] << ',' << metric << ',' << m << ',' << format_g17(s.values[i]) << '\n';
}

struct ComputeSummary {
  std::string config_hash;
  std::vector<MonthResult> months;
};

inline ComputeSummary compute(const PipelineConfig& cfg) {
  cfg.validate();
  const auto in = load_inputs(cfg);
  const auto hash = config_hash(cfg);
  const auto full = build_graph(in.edges, in.store);
  const ArticleNodeIndex mapping(in.store, in.hierarchy);
  const auto window = cfg.window();

  ComputeSummary summary;
  summary.config_hash = hash;
  summary.months.resize(window.size());
  const unsigned threads = std::max(1u, cfg.threads);
  const bool months_parallel = window.size() >= threads && threads > 1;
  parallel_for(window.size(), months_parallel ? threads : 1u, [&](std::size_t t) {
    summary.months[t] = compute_month(cfg, in, full, mapping, window[t], t, months_parallel ? 1u : threads);
  });

  StagedOutput staged(cfg.output_dir, "compute", {"scores", "samples", "article_scores", "manifest.json"});
  const std::map<std::string, std::string> header = {{"config_hash", hash}};
  json manifest_months = json::array();
  json files = json::array();
  for (const auto& r : summary.months) {
    for (const auto& s : r.scores) {
      const auto rel = scores_file(s.aspect, r.month);
      auto out = open_output(staged.dir() / rel);
      write_aspect_csv(out, s, header);
      files.push_back(rel);
    }
    {
      const auto rel = sample_file(r.month);
      auto out = open_output(staged.dir() / rel);
      out << hash_comment(hash);
      for (auto id : r.sampled_ids) out << id << '\n';
      files.push_back(rel);
    }
    if (cfg.dump_article_scores) {
      for (const auto& [metric, scores] : {std::pair{"disruption", &r.disruption}, std::pair{"pagerank", &r.influence}}) {
        const auto rel = "article_scores/" + std::string(metric) + "_" + r.month.str() + ".csv";
        auto out = open_output(staged.dir() / rel);
        write_article_scores(out, *scores, metric, r.month, hash);
        files.push_back(rel);
      }
    }
    manifest_months.push_back({{"month", r.month.str()},
                               {"sample_seed", r.seed},
                               {"snapshot_nodes", r.snapshot_nodes},
                               {"snapshot_edges", r.snapshot_edges},
                               {"sampled_nodes", r.sampled_nodes},
                               {"sampled_edges", r.sampled_edges},
                               {"month_articles", r.month_articles},
                               {"pagerank_converged", r.pagerank_converged},
                               {"pagerank_iterations", r.pagerank_iterations}});
  }
  json manifest = {{"config_hash", hash},
                   {"first_month", cfg.first_month.str()},
                   {"last_month", cfg.last_month.str()},
                   {"base_seed", cfg.base_seed},
                   {"seed_rule", "sample seed = base_seed + month index within the window"},
                   {"sample_fraction", cfg.sample_fraction},
                   {"pagerank", {{"alpha", cfg.pagerank.alpha}, {"tol", cfg.pagerank.tol}, {"max_iter", cfg.pagerank.max_iter}}},
                   {"rrf_k", cfg.rrf_k},
                   {"informativeness_mode", mode_name(cfg.informativeness_mode)},
                   {"months", manifest_months},
                   {"files", files}};
  {
    auto out = open_output(staged.dir() / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  staged.commit();
  return summary;
}

/// Checks that compute ran with the current configuration.
inline void require_compute_outputs(const PipelineConfig& cfg, const std::string& hash) {
  const auto manifest_path = cfg.output_dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw Error("missing upstream outputs: " + manifest_path.string() + " (run 'compute' first)");
  const auto manifest = json::parse(read_file(manifest_path));
  if (manifest.value("config_hash", std::string{}) != hash)
    throw Error("outputs in " + cfg.output_dir.string() +
                " were computed with a different configuration or inputs; rerun 'compute'");
}

inline AspectScores load_scores(const PipelineConfig& cfg, Aspect a, const Month& m) {
  const auto p = cfg.output_dir / scores_file(a, m);
  std::ifstream in(p);
  if (!in) throw Error("missing upstream output " + p.string());
  try {
    return read_aspect_csv(in);
  } catch (const ParseError& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

inline std::vector<ArticleId> load_sample(const PipelineConfig& cfg, const Month& m) {
  const auto p = cfg.output_dir / sample_file(m);
  std::ifstream in(p);
  if (!in) throw Error("missing upstream output " + p.string());
  std::vector<ArticleId> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank_or_comment(line)) continue;
    auto id = parse_u64(line);
    if (!id) throw Error(p.string() + ": malformed article id");
    ids.push_back(*id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// fuse

/// Global fused ranking of one month from its four aspect tables.
inline RelevanceRanking fuse_month(const std::array<AspectScores, 4>& scores, int k, const Month& m) {
  std::vector<Ranks> ranks;
  for (const auto& s : scores) ranks.push_back(rank_by_aspect(s.values));
  return rrf_fuse(ranks, k, m);
}

inline void write_rankings_csv(std::ostream& out, const std::vector<RelevanceRanking>& rankings,
                               const std::string& hash) {
  out << hash_comment(hash) << "month,scope,tree_code,rrf_value,rank\n";
  for (const auto& r : rankings) {
    const auto month = r.month.str();
    const auto scope = r.scope();
    for (const auto& code : r.ordered())
      out << month << ',' << scope << ',' << code << ',' << format_g17(r.rrf.at(code)) << ','
          << r.rank.at(code) << '\n';
  }
}

/// Reads one rankings file; result keyed by scope (nullopt = global).
inline std::map<std::optional<int>, RelevanceRanking> read_rankings_csv(std::istream& in) {
  std::map<std::optional<int>, RelevanceRanking> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    if (!header) {
      if (line != "month,scope,tree_code,rrf_value,rank") throw ParseError(lineno, "unexpected rankings header");
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 5) throw ParseError(lineno, "expected 5 columns");
    std::optional<int> level;
    if (f[1] != "global") {
      if (f[1].substr(0, 6) != "level-") throw ParseError(lineno, "bad scope");
      auto l = parse_u64(f[1].substr(6));
      if (!l) throw ParseError(lineno, "bad scope");
      level = static_cast<int>(*l);
    }
    auto& r = out[level];
    r.level = level;
    try {
      r.month = Month::parse(f[0]);
      auto code = TreeCode::parse(f[2]);
      auto v = parse_double(f[3]);
      auto rank = parse_u64(f[4]);
      if (!v || !rank) throw Error("bad number");
      r.rrf.emplace(code, *v);
      r.rank.emplace(code, static_cast<int>(*rank));
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

inline std::map<std::optional<int>, RelevanceRanking> load_rankings(const PipelineConfig& cfg, const Month& m) {
  const auto p = cfg.output_dir / rankings_file(m);
  std::ifstream in(p);
  if (!in) throw Error("missing upstream output " + p.string() + " (run 'fuse' first)");
  try {
    return read_rankings_csv(in);
  } catch (const ParseError& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

inline std::array<AspectScores, 4> load_month_scores(const PipelineConfig& cfg, const Month& m) {
  std::array<AspectScores, 4> s;
  for (std::size_t a = 0; a < kAspects.size(); ++a) s[a] = load_scores(cfg, kAspects[a], m);
  return s;
}

inline void fuse(const PipelineConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  require_compute_outputs(cfg, hash);
  const auto window = cfg.window();
  std::vector<std::vector<RelevanceRanking>> per_month(window.size());
  parallel_for(window.size(), std::max(1u, cfg.threads), [&](std::size_t t) {
    const auto global = fuse_month(load_month_scores(cfg, window[t]), cfg.rrf_k, window[t]);
    int max_level = 0;
    for (const auto& [code, v] : global.rrf) max_level = std::max(max_level, code.level());
    per_month[t].push_back(global);
    for (int l = 1; l <= max_level; ++l) per_month[t].push_back(rerank_level(global, l));
  });
  StagedOutput staged(cfg.output_dir, "fuse", {"rankings"});
  for (std::size_t t = 0; t < window.size(); ++t) {
    auto out = open_output(staged.dir() / rankings_file(window[t]));
    write_rankings_csv(out, per_month[t], hash);
  }
  staged.commit();
}

// ---------------------------------------------------------------------------
// trend

struct TrendRow {
  TreeCode code;
  int level = 0;
  double slope = 0.0;
  int first_year = 0;
  int last_year = 0;
};

/// level -> year -> code -> mean monthly rank within the level.
using YearlyRanks = std::map<int, std::map<int, std::map<TreeCode, double>>>;

inline YearlyRanks yearly_level_ranks(const PipelineConfig& cfg) {
  std::map<int, std::map<int, std::vector<RelevanceRanking>>> grouped;
  for (const auto& m : cfg.window())
    for (auto& [level, r] : load_rankings(cfg, m))
      if (level) grouped[*level][m.year()].push_back(std::move(r));
  YearlyRanks out;
  for (const auto& [level, years] : grouped)
    for (const auto& [year, rankings] : years) out[level][year] = average_ranks(rankings);
  return out;
}

inline std::vector<TrendRow> trend_rows(const std::map<int, std::map<TreeCode, double>>& years, int level) {
  std::map<TreeCode, std::vector<std::pair<int, double>>> series;
  for (const auto& [year, avg] : years)
    for (const auto& [code, r] : avg) series[code].emplace_back(year, r);
  std::vector<TrendRow> rows;
  for (const auto& [code, s] : series) {
    if (s.size() < 2) continue;
    std::vector<double> ranks;
    for (const auto& [y, r] : s) ranks.push_back(r);
    rows.push_back({code, level, rank_trend_slope(ranks), s.front().first, s.back().first});
  }
  return rows;
}

inline void trend(const PipelineConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  require_compute_outputs(cfg, hash);
  const auto yearly = yearly_level_ranks(cfg);
  StagedOutput staged(cfg.output_dir, "trend", {"trends"});
  for (const auto& [level, years] : yearly) {
    const auto suffix = "level" + std::to_string(level) + ".csv";
    {
      auto out = open_output(staged.dir() / "trends" / ("trend_" + suffix));
      out << hash_comment(hash) << "tree_code,level,slope,first_year,last_year\n";
      for (const auto& row : trend_rows(years, level))
        out << row.code << ',' << row.level << ',' << format_g17(row.slope) << ',' << row.first_year << ','
            << row.last_year << '\n';
    }
    {
      auto out = open_output(staged.dir() / "trends" / ("yearly_ranks_" + suffix));
      out << hash_comment(hash) << "tree_code,level,year,average_rank\n";
      for (const auto& [year, avg] : years)
        for (const auto& [code, r] : avg) out << code << ',' << level << ',' << year << ',' << format_g17(r) << '\n';
    }
    {
      auto out = open_output(staged.dir() / "trends" / ("extremes_" + suffix));
      out << hash_comment(hash) << "kind,year,position,tree_code,average_rank\n";
      for (const auto& [year, avg] : years) {
        int pos = 0;
        for (const auto& [code, r] : top_k_by_average(avg, cfg.top_k))
          out << "top," << year << ',' << ++pos << ',' << code << ',' << format_g17(r) << '\n';
        pos = 0;
        for (const auto& [code, r] : bottom_k_by_average(avg, cfg.top_k))
          out << "bottom," << year << ',' << ++pos << ',' << code << ',' << format_g17(r) << '\n';
      }
    }
  }
  staged.commit();
}

// ---------------------------------------------------------------------------
// evaluate

inline constexpr std::array<std::string_view, 5> kEvaluatedMetrics = {
    "disruptiveness", "influence", "informativeness", "usefulness", "relevance"};

struct CohortTest {
  std::string group;  // release name or year
  std::string metric;
  bool skipped = false;
  TestResult result;
  double mean_test = 0.0;
  double mean_control = 0.0;
};

struct EvaluateSummary {
  std::vector<CohortTest> evolution;
  std::vector<CohortTest> retraction;
  std::size_t correlation_pairs = 0;
  std::optional<std::vector<std::vector<double>>> pearson, spearman;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline CohortTest run_cohort_test(std::string group, std::string_view metric, const Cohorts& c) {
  CohortTest t;
  t.group = std::move(group);
  t.metric = std::string(metric);
  t.skipped = c.skipped || c.test.empty() || c.control.empty();
  t.mean_test = mean_of(c.test);
  t.mean_control = mean_of(c.control);
  t.result.n1 = c.test.size();
  t.result.n2 = c.control.size();
  if (!t.skipped) t.result = mann_whitney(c.test, c.control);
  return t;
}

inline json to_json(const CohortTest& t, const char* group_key, bool numeric_group) {
  json j;
  j[group_key] = numeric_group ? json(std::stoi(t.group)) : json(t.group);
  j["aspect"] = t.metric;
  j["n1"] = t.result.n1;
  j["n2"] = t.result.n2;
  if (t.skipped) {
    j["status"] = "skipped";
    return j;
  }
  j["status"] = "ok";
  j["u"] = t.result.u_statistic;
  j["p"] = t.result.p_value;
  j["method"] = method_name(t.result.method);
  j["mean_test"] = t.mean_test;
  j["mean_control"] = t.mean_control;
  return j;
}

inline void write_matrix_csv(std::ostream& out, const std::vector<std::vector<double>>& m, const std::string& hash) {
  out << hash_comment(hash) << "aspect";
  for (auto name : kEvaluatedMetrics) out << ',' << name;
  out << '\n';
  for (std::size_t a = 0; a < m.size(); ++a) {
    out << kEvaluatedMetrics[a];
    for (double v : m[a]) out << ',' << format_g17(v);
    out << '\n';
  }
}

inline EvaluateSummary evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  require_compute_outputs(cfg, hash);
  const auto in = load_inputs(cfg);
  const auto& h = in.hierarchy;
  const ArticleNodeIndex mapping(in.store, h);
  const auto window = cfg.window();

  // metric values per month, in kEvaluatedMetrics order
  std::vector<std::array<NodeValues, 5>> node_values(window.size());
  std::vector<std::vector<ArticleId>> samples(window.size());
  parallel_for(window.size(), std::max(1u, cfg.threads), [&](std::size_t t) {
    auto scores = load_month_scores(cfg, window[t]);
    for (std::size_t a = 0; a < 4; ++a) node_values[t][a] = std::move(scores[a].values);
    node_values[t][4] = load_rankings(cfg, window[t]).at(std::nullopt).rrf;
    samples[t] = load_sample(cfg, window[t]);
  });

  EvaluateSummary summary;

  // Evolution cohorts per release: descriptor score averaged over the
  // release's months inside the window.
  std::map<std::string, std::vector<std::size_t>> releases;
  for (std::size_t t = 0; t < window.size(); ++t) releases[release_of(window[t])].push_back(t);
  for (const auto& [release, months] : releases) {
    std::vector<ChangeRecord> changes;
    if (in.changes)
      for (const auto& c : *in.changes)
        if (c.release == release) changes.push_back(c);
    for (std::size_t a = 0; a < kEvaluatedMetrics.size(); ++a) {
      std::map<DescriptorId, std::pair<double, int>> acc;
      for (auto t : months)
        for (const auto& [d, v] : descriptor_scores(node_values[t][a], h)) {
          acc[d].first += v;
          ++acc[d].second;
        }
      std::map<DescriptorId, double> mean;
      for (const auto& [d, sn] : acc) mean.emplace_hint(mean.end(), d, sn.first / sn.second);
      summary.evolution.push_back(run_cohort_test(release, kEvaluatedMetrics[a], evolution_cohorts(mean, changes)));
    }
  }

  // Retraction cohorts per year.
  std::set<int> years;
  for (const auto& m : window) years.insert(m.year());
  for (int year : years)
    for (std::size_t a = 0; a < kEvaluatedMetrics.size(); ++a) {
      std::vector<MonthlyPresence> presence;
      for (std::size_t t = 0; t < window.size(); ++t)
        presence.push_back({window[t], &node_values[t][a], samples[t]});
      summary.retraction.push_back(run_cohort_test(std::to_string(year), kEvaluatedMetrics[a],
                                                   retraction_cohorts(in.store, mapping, h, presence, year)));
    }

  // Aspect correlation over (descriptor, month) pairs scored in every metric.
  std::vector<std::vector<double>> columns(kEvaluatedMetrics.size());
  for (std::size_t t = 0; t < window.size(); ++t) {
    std::array<std::map<DescriptorId, double>, 5> d;
    for (std::size_t a = 0; a < 5; ++a) d[a] = descriptor_scores(node_values[t][a], h);
    for (const auto& [desc, v0] : d[0]) {
      std::array<double, 5> row{};
      bool complete = true;
      for (std::size_t a = 0; a < 5 && complete; ++a) {
        auto it = d[a].find(desc);
        if (it == d[a].end()) complete = false;
        else row[a] = it->second;
      }
      if (!complete) continue;
      for (std::size_t a = 0; a < 5; ++a) columns[a].push_back(row[a]);
    }
  }
  summary.correlation_pairs = columns[0].size();
  if (summary.correlation_pairs >= 3) {
    summary.pearson = correlation_matrix(columns, CorrelationKind::pearson);
    summary.spearman = correlation_matrix(columns, CorrelationKind::spearman);
  }

  StagedOutput staged(cfg.output_dir, "evaluate", {"evaluation"});
  auto dump = [&](const char* name, const std::vector<CohortTest>& tests, const char* key, bool numeric) {
    json results = json::array();
    for (const auto& t : tests) results.push_back(to_json(t, key, numeric));
    auto out = open_output(staged.dir() / "evaluation" / name);
    out << json{{"config_hash", hash}, {"results", results}}.dump(2) << '\n';
  };
  dump("evolution.json", summary.evolution, "release", false);
  dump("retraction.json", summary.retraction, "year", true);
  if (summary.pearson) {
    auto out = open_output(staged.dir() / "evaluation" / "correlation_pearson.csv");
    write_matrix_csv(out, *summary.pearson, hash);
    auto out2 = open_output(staged.dir() / "evaluation" / "correlation_spearman.csv");
    write_matrix_csv(out2, *summary.spearman, hash);
  }
  {
    auto out = open_output(staged.dir() / "evaluation" / "summary.json");
    json s = {{"config_hash", hash},
              {"correlation_pairs", summary.correlation_pairs},
              {"correlation", summary.pearson ? "ok" : "skipped"},
              {"changes_file", in.changes ? "present" : "absent"}};
    out << s.dump(2) << '\n';
  }
  staged.commit();
  return summary;
}

// ---------------------------------------------------------------------------
// export-plots

inline void export_plots(const PipelineConfig& cfg) {
  cfg.validate();
  const auto hash = config_hash(cfg);
  require_compute_outputs(cfg, hash);
  const auto window = cfg.window();
  std::map<int, std::vector<RelevanceRanking>> by_level;
  for (const auto& m : window)
    for (auto& [level, r] : load_rankings(cfg, m))
      if (level) by_level[*level].push_back(std::move(r));
  std::vector<std::string> labels;
  for (const auto& m : window) labels.push_back(m.str());

  StagedOutput staged(cfg.output_dir, "plots", {"plots"});
  for (const auto& [level, rankings] : by_level) {
    const auto avg = average_ranks(rankings);
    std::vector<PlotSeries> series;
    for (const auto& [code, r] : top_k_by_average(avg, cfg.top_k)) {
      PlotSeries s{code.str(), {}};
      for (const auto& rk : rankings) {
        auto it = rk.rank.find(code);
        s.y.push_back(it == rk.rank.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
      }
      series.push_back(std::move(s));
    }
    auto out = open_output(staged.dir() / "plots" / ("rank_level" + std::to_string(level) + ".svg"));
    write_rank_svg(out, "Relevance rank, level " + std::to_string(level) + " (top " + std::to_string(cfg.top_k) + ")",
                   labels, series, "config_hash=" + hash);
  }
  staged.commit();
}

// ---------------------------------------------------------------------------
// generate

inline void generate_files(const PipelineConfig& cfg) {
  const auto sc = generate(cfg.scenario);
  {
    auto out = open_output(cfg.hierarchy_path);
    write_hierarchy(out, sc.hierarchy);
  }
  {
    auto out = open_output(cfg.articles_path);
    write_articles(out, sc.articles);
  }
  {
    auto out = open_output(cfg.citations_path);
    write_citations(out, sc.citations);
  }
  if (!cfg.changes_path.empty()) {
    auto out = open_output(cfg.changes_path);
    write_changes(out, sc.changes);
  }
}

}  // namespace kosrel::pipeline
