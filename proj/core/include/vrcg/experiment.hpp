#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vrcg/linalg.hpp"
#include "vrcg/prox.hpp"
#include "vrcg/rng.hpp"
#include "vrcg/trace.hpp"

namespace vrcg {

enum class ExperimentKind { kTable1, kFigure };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kTable1;
  Index d = 50;
  Index r = 1;
  double lambda = 2.0;
  /// Table 1 noise level c.
  double noise_c = 5.0;
  /// Entrywise noise of the stochastic observations (figure).
  double noise_sigma = 5.0;
  Index trials = 50;
  /// epsilon as a fraction of ||Y Y^T||_F^2.
  double epsilon_rel = 0.01;
  /// mu as a multiple of epsilon / d^2 (figure).
  double mu_scale = 1.0;
  std::uint64_t seed = 7;
  /// Worker threads for independent trials; 0 picks the hardware count.
  unsigned threads = 0;
  /// Record wall-clock seconds (makes the CSV output run-dependent).
  bool timing = false;
  /// Write per-trial solver traces into `out_dir` (figure only).
  bool write_traces = true;
  /// Baselines stop after this multiple of SVRGCG's rank-one budget.
  double baseline_budget_factor = 20.0;
  std::string out_dir;

  void validate() const;
  /// Probability that an entry of Y is nonzero.
  double nonzero_probability() const;
};

struct Signal {
  Matrix y;
  Matrix yyt;
};

/// Y is d x r with entries zero w.p. 1 - p and uniform on {1, ..., 10}
/// otherwise. An all-zero draw is redrawn.
Signal generate_signal(Index d, Index r, double nonzero_prob, Rng& rng);

/// M = y y^T + (c/2)(N + N^T) with N entrywise standard Gaussian.
Matrix build_table1_instance(const Vector& y, double c, Rng& rng);

struct SparsityCounts {
  Index nnz = 0;
  Index rank = 0;
};

/// Entries with |x_ij| > zero_tol, and singular values above rank_tol * s_max.
SparsityCounts nnz_and_rank(const Matrix& x, double zero_tol, double rank_tol);

struct SplittingOptions {
  double rho = 1.0;
  Index max_iterations = 20000;
  double tolerance = 1e-9;
};

struct SplittingResult {
  /// Feasible iterate (on the set).
  Matrix feasible;
  /// Exactly sparse iterate (soft-thresholded).
  Matrix sparse;
  Index iterations = 0;
  bool converged = false;
};

/// Reference solver for min ||X - M||^2 / 2 + lambda ||X||_1 over the set by
/// alternating directions: projection onto the set, entrywise soft threshold,
/// scaled dual update, with residual balancing of the penalty.
SplittingResult solve_sparse_on_set(const Matrix& m, double lambda, const FeasibleSet& set,
                                    const SplittingOptions& options = {});

struct MetricsRow {
  std::string method;
  Index trials = 0;
  Index trials_ok = 0;
  double relative_error = 0.0;
  double nnz_ratio = 0.0;
  double rank = 0.0;
  double gradients = 0.0;
  double rank1_svd_equiv = 0.0;
  double seconds = 0.0;
  /// Fraction of successful trials that reached the target accuracy.
  double reached = 0.0;
};

struct TrialRow {
  std::string method;
  Index trial = 0;
  bool ok = false;
  double relative_error = 0.0;
  double nnz_ratio = 0.0;
  Index rank = 0;
  std::uint64_t gradients = 0;
  std::uint64_t rank1_svd_equiv = 0;
  double seconds = 0.0;
  bool reached = false;
  std::string error;
};

struct ExperimentResult {
  std::vector<MetricsRow> metrics;
  std::vector<TrialRow> trials;
};

/// Runs every trial (in parallel), sorts rows by (trial, method order) and
/// averages per method. When out_dir is set, writes metrics.csv,
/// per_trial.csv and, for figures, trace_<method>_<trial>.csv.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
  double lambda = 0.0;
  MetricsRow metrics;
};

/// Low Rank & Sparse metrics of Table 1 for each lambda.
std::vector<SweepRow> sweep_lambda(const ExperimentConfig& config,
                                   const std::vector<double>& lambdas);

/// Lambda with the smallest relative error among rows with nnz_ratio at most
/// `max_nnz_ratio` (all rows when none qualifies).
double select_lambda(const std::vector<SweepRow>& rows, double max_nnz_ratio);

}  // namespace vrcg
