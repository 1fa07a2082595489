#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kosrel/pipeline.hpp"

using namespace kosrel;
namespace fs = std::filesystem;
namespace pl = kosrel::pipeline;

namespace {

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("kosrel_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "run.conf") << "hierarchy = data/h.tsv\n"
                                         "articles = data/a.jsonl\n"
                                         "citations = data/c.tsv\n"
                                         "changes = data/ch.tsv\n"
                                         "output_dir = out\n"
                                         "first_month = 2014-03\n"
                                         "last_month = 2014-08\n"
                                         "sample_fraction = 0.5\n"
                                         "top_k = 3\n"
                                         "[synth]\n"
                                         "months = 8\n"
                                         "articles_per_month = 150\n"
                                         "branching = [3, 3, 3]\n"
                                         "evolving_fraction = 0.1\n"
                                         "retraction_rate = 0.05\n";
    cfg_ = load_config(root_ / "run.conf");
  }
  void TearDown() override { fs::remove_all(root_); }

  void run_all() {
    pl::generate_files(cfg_);
    pl::compute(cfg_);
    pl::fuse(cfg_);
    pl::trend(cfg_);
    pl::evaluate(cfg_);
    pl::export_plots(cfg_);
  }

  fs::path root_;
  PipelineConfig cfg_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return out;
}

std::string first_data_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return line;
  return {};
}

}  // namespace

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  std::istringstream in("first_month = 2015-01\n[pagerank]\nalpha = 0.5\n[synth]\nbranching = 2, 3\n");
  auto c = parse_config(in, "/base");
  EXPECT_EQ(c.first_month, Month(2015, 1));
  EXPECT_EQ(c.pagerank.alpha, 0.5);
  EXPECT_EQ(c.scenario.branching, (std::vector<int>{2, 3}));
  std::istringstream bad("nonsense = 1\n");
  EXPECT_THROW(parse_config(bad), ParseError);
  std::istringstream rel("hierarchy = x/h.tsv\n");
  EXPECT_EQ(parse_config(rel, "/base").hierarchy_path, fs::path("/base/x/h.tsv"));
}

TEST(Config, HashIgnoresThreadsAndOutputDir) {
  PipelineConfig a;
  auto b = a;
  b.threads = 8;
  b.output_dir = "elsewhere";
  EXPECT_EQ(pl::config_hash(a), pl::config_hash(b));
  b.base_seed = 7;
  EXPECT_NE(pl::config_hash(a), pl::config_hash(b));
}

TEST_F(PipelineTest, EndToEndOutputs) {
  run_all();
  const auto out = root_ / "out";
  for (auto a : kAspects) EXPECT_TRUE(fs::exists(out / pl::scores_file(a, Month(2014, 3))));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "rankings/rankings_2014-08.csv"));
  EXPECT_TRUE(fs::exists(out / "trends/trend_level2.csv"));
  EXPECT_TRUE(fs::exists(out / "evaluation/evolution.json"));
  EXPECT_TRUE(fs::exists(out / "evaluation/correlation_pearson.csv"));
  EXPECT_TRUE(fs::exists(out / "plots/rank_level1.svg"));
  EXPECT_EQ(first_data_line(out / pl::scores_file(Aspect::influence, Month(2014, 3))),
            "tree_code,level,aspect,month,value");
  EXPECT_EQ(first_data_line(out / "rankings/rankings_2014-08.csv"), "month,scope,tree_code,rrf_value,rank");
  EXPECT_EQ(first_data_line(out / "trends/trend_level2.csv"), "tree_code,level,slope,first_year,last_year");
  for (const auto& e : fs::directory_iterator(out)) EXPECT_EQ(e.path().filename().string().rfind(".staging", 0), std::string::npos);

  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  ASSERT_EQ(manifest["months"].size(), 6u);
  // seed = base_seed + month index
  EXPECT_EQ(manifest["months"][0]["sample_seed"], 42u);
  EXPECT_EQ(manifest["months"][5]["sample_seed"], 47u);

  auto evo = nlohmann::json::parse(slurp(out / "evaluation/evolution.json"));
  bool saw_ok = false, saw_skip = false;
  for (const auto& r : evo["results"]) {
    saw_ok |= r["status"] == "ok" && r["release"] == "2014AA";
    saw_skip |= r["status"] == "skipped" && r["release"] == "2014AB";
  }
  EXPECT_TRUE(saw_ok);
  EXPECT_TRUE(saw_skip);
}

TEST_F(PipelineTest, ScoresRoundTripThroughCsv) {
  pl::generate_files(cfg_);
  auto summary = pl::compute(cfg_);
  for (const auto& s : summary.months.front().scores)
    EXPECT_EQ(pl::load_scores(cfg_, s.aspect, s.month), s);
}

TEST_F(PipelineTest, ThreadCountDoesNotChangeBytes) {
  cfg_.threads = 1;
  run_all();
  auto one = tree_contents(root_ / "out");
  fs::remove_all(root_ / "out");
  cfg_.threads = 4;
  run_all();
  EXPECT_EQ(tree_contents(root_ / "out"), one);
}

TEST_F(PipelineTest, DownstreamRejectsStaleOutputs) {
  pl::generate_files(cfg_);
  pl::compute(cfg_);
  cfg_.base_seed += 1;
  EXPECT_THROW(pl::fuse(cfg_), Error);
  fs::remove_all(root_ / "out");
  EXPECT_THROW(pl::evaluate(cfg_), Error);
}

TEST_F(PipelineTest, MissingInputNamesThePath) {
  try {
    pl::compute(cfg_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("h.tsv"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(root_ / "out" / "manifest.json"));
}

TEST_F(PipelineTest, IngestReportsDrops) {
  pl::generate_files(cfg_);
  std::ofstream(cfg_.citations_path, std::ios::app) << "1\t1\n1\t999999\n";
  auto r = pl::ingest(cfg_);
  EXPECT_EQ(r.dropped.self_loops, 1u);
  EXPECT_EQ(r.dropped.unknown_endpoints, 1u);
  EXPECT_EQ(r.articles, 8u * 150u);
}

TEST_F(PipelineTest, CliRunsEverySubcommand) {
  const std::string cli = KOSREL_CLI_PATH;
  const std::string conf = (root_ / "run.conf").string();
  for (const char* sub : {"generate", "ingest", "compute", "fuse", "trend", "evaluate", "export-plots"}) {
    const std::string cmd = "\"" + cli + "\" " + sub + " -c \"" + conf + "\" --threads 2 > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0) << sub;
  }
  EXPECT_TRUE(fs::exists(root_ / "out" / "plots" / "rank_level2.svg"));
  const std::string bad = "\"" + cli + "\" compute -c \"" + (root_ / "missing.conf").string() + "\" 2> /dev/null";
  EXPECT_NE(std::system(bad.c_str()), 0);
}
