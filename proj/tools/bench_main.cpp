#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrcg/experiment.hpp"
#include "vrcg/report.hpp"

namespace {

struct FlagSpec {
  const char* name;
  const char* key;
  const char* help;
};

const FlagSpec kValueFlags[] = {
    {"--d", "d", "Dimension"},
    {"--rank,-r", "r", "Signal rank"},
    {"--lambda", "lambda", "l1 weight"},
    {"--c", "noise_c", "Table 1 noise level c"},
    {"--sigma", "noise_sigma", "Entrywise observation noise (figure)"},
    {"--trials", "trials", "Number of independent trials"},
    {"--epsilon-rel", "epsilon_rel", "Target accuracy as a fraction of ||YY^T||_F^2"},
    {"--mu-scale", "mu_scale", "Smoothing parameter as a multiple of eps/d^2 (figure)"},
    {"--seed", "seed", "Base seed"},
    {"--threads", "threads", "Worker threads (0 = hardware)"},
    {"--budget-factor", "baseline_budget_factor",
     "Baseline rank-one budget as a multiple of SVRGCG's (figure)"},
    {"--out", "out", "Output directory"},
    {"--tau-rule", "tau_rule", "Radius rule (trace-of-signal)"},
    {"--format", "format", "Output format (csv)"},
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::string config_file;
  bool timing = false;
  bool no_traces = false;
  std::vector<double> lambdas;
  double max_nnz_ratio = 2.0;
};

void add_common_options(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_file, "key = value file; flags override it");
  for (const FlagSpec& f : kValueFlags) {
    auto* slot = &sub.values[f.key];
    sub.app->add_option(f.name, *slot, f.help);
  }
  sub.app->add_flag("--timing", sub.timing, "Record wall-clock seconds (non-reproducible)");
  sub.app->add_flag("--no-traces", sub.no_traces, "Skip per-trial trace files");
}

vrcg::ExperimentConfig build_config(const Subcommand& sub, vrcg::ExperimentKind kind) {
  vrcg::ExperimentConfig config;
  config.experiment = kind;
  if (kind == vrcg::ExperimentKind::kFigure) {
    config.d = 300;
    config.trials = 30;
  }
  std::map<std::string, std::string> merged;
  if (!sub.config_file.empty()) merged = vrcg::read_key_value_file(sub.config_file);
  for (const FlagSpec& f : kValueFlags) {
    const std::string long_name = std::string(f.name).substr(0, std::string(f.name).find(','));
    if (sub.app->count(long_name) > 0) merged[f.key] = sub.values.at(f.key);
  }
  if (sub.timing) merged["timing"] = "true";
  if (sub.no_traces) merged["traces"] = "false";
  merged.erase("experiment");
  vrcg::apply_config_values(merged, config);
  return config;
}

void print_metrics(const std::vector<vrcg::MetricsRow>& rows) {
  std::ostringstream out;
  vrcg::write_metrics_csv(out, rows);
  std::cout << out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic low-rank and sparse estimation benchmarks"};
  app.require_subcommand(1);

  Subcommand table1{app.add_subcommand("table1", "Sparse rank-one recovery table")};
  Subcommand figure{app.add_subcommand("figure", "SVRGCG vs SCG vs SCGS convergence traces")};
  Subcommand sweep{app.add_subcommand("sweep-lambda", "Sweep lambda for the table1 experiment")};
  for (Subcommand* s : {&table1, &figure, &sweep}) add_common_options(*s);
  sweep.app->add_option("--lambdas", sweep.lambdas, "Lambda grid")->delimiter(',');
  sweep.app->add_option("--max-nnz-ratio", sweep.max_nnz_ratio,
                        "Selection constraint on the nnz ratio");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*table1.app) {
      const auto config = build_config(table1, vrcg::ExperimentKind::kTable1);
      print_metrics(vrcg::run_experiment(config).metrics);
    } else if (*figure.app) {
      const auto config = build_config(figure, vrcg::ExperimentKind::kFigure);
      print_metrics(vrcg::run_experiment(config).metrics);
    } else if (*sweep.app) {
      const auto config = build_config(sweep, vrcg::ExperimentKind::kTable1);
      std::vector<double> grid = sweep.lambdas;
      if (grid.empty()) grid = {0.25, 0.5, 1, 2, 3, 4, 6, 8, 10, 12};
      const auto rows = vrcg::sweep_lambda(config, grid);
      std::ostringstream out;
      vrcg::write_sweep_csv(out, rows);
      std::cout << out.str();
      std::cout << "selected_lambda," << vrcg::format_double(vrcg::select_lambda(rows, sweep.max_nnz_ratio))
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
