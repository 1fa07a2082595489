#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kosrel/kosrel.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "pipeline config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--threads", o.threads, "worker threads (output does not depend on it)");
  cmd->add_option("--seed", o.seed, "override base_seed (synth.seed for 'generate')");
}

kosrel::PipelineConfig load(const CommonOptions& o, bool for_generate = false) {
  auto cfg = kosrel::load_config(o.config);
  if (o.threads) cfg.threads = *o.threads;
  if (o.seed) (for_generate ? cfg.scenario.seed : cfg.base_seed) = *o.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  namespace pl = kosrel::pipeline;
  CLI::App app{"kosrel: time-varying concept relevance in a hierarchical vocabulary"};
  app.require_subcommand(1);

  CommonOptions ingest_o, generate_o, compute_o, fuse_o, trend_o, evaluate_o, plots_o;
  auto* ingest = app.add_subcommand("ingest", "parse and validate the inputs, print counts");
  add_common(ingest, ingest_o);
  auto* generate = app.add_subcommand("generate", "write a synthetic scenario to the configured input paths");
  add_common(generate, generate_o);
  auto* compute = app.add_subcommand("compute", "per-month aspect scores");
  add_common(compute, compute_o);
  auto* fuse = app.add_subcommand("fuse", "reciprocal rank fusion per month and level");
  add_common(fuse, fuse_o);
  auto* trend = app.add_subcommand("trend", "yearly average ranks, slopes, top/bottom tables");
  add_common(trend, trend_o);
  auto* evaluate = app.add_subcommand("evaluate", "cohort tests and aspect correlations");
  add_common(evaluate, evaluate_o);
  auto* plots = app.add_subcommand("export-plots", "SVG rank trajectories per level");
  add_common(plots, plots_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto report = pl::ingest(load(ingest_o));
      std::cout << pl::to_json(report).dump(2) << '\n';
    } else if (*generate) {
      const auto cfg = load(generate_o, true);
      pl::generate_files(cfg);
      std::cout << "wrote scenario (seed " << cfg.scenario.seed << ") to " << cfg.hierarchy_path.parent_path().string()
                << '\n';
    } else if (*compute) {
      const auto summary = pl::compute(load(compute_o));
      std::size_t unconverged = 0;
      for (const auto& m : summary.months) unconverged += !m.pagerank_converged;
      std::cout << "computed " << summary.months.size() << " months, config_hash=" << summary.config_hash << '\n';
      if (unconverged) std::cerr << "warning: PageRank did not converge in " << unconverged << " month(s)\n";
    } else if (*fuse) {
      pl::fuse(load(fuse_o));
      std::cout << "fused rankings written\n";
    } else if (*trend) {
      pl::trend(load(trend_o));
      std::cout << "trend tables written\n";
    } else if (*evaluate) {
      const auto s = pl::evaluate(load(evaluate_o));
      auto print = [](const char* title, const std::vector<pl::CohortTest>& tests) {
        std::cout << title << '\n';
        for (const auto& t : tests) {
          std::cout << "  " << t.group << ' ' << t.metric << ": ";
          if (t.skipped)
            std::cout << "skipped\n";
          else
            std::cout << "p=" << t.result.p_value << " (n1=" << t.result.n1 << ", n2=" << t.result.n2 << ")\n";
        }
      };
      print("evolution", s.evolution);
      print("retraction", s.retraction);
    } else if (*plots) {
      pl::export_plots(load(plots_o));
      std::cout << "plots written\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
