#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "vrcg/linalg.hpp"
#include "vrcg/prox.hpp"
#include "vrcg/schedule.hpp"
#include "vrcg/smoothing.hpp"
#include "vrcg/stochastic.hpp"
#include "vrcg/trace.hpp"

namespace vrcg {

/// f = G + R + h with G stochastic, R smoothed (or absent) and h the
/// indicator of `set`.
struct ProblemSpec {
  std::shared_ptr<const StochasticObjective> objective;
  /// R_mu; may be null.
  std::shared_ptr<const SmoothableTerm> smooth_term;
  FeasibleSet set;
  ProblemConstants constants;
  /// Report f with the exact nonsmooth R rather than R_mu.
  bool report_nonsmooth = true;

  /// Builds a spec whose constants are read off the parts: alpha = alpha_g +
  /// the term's strong convexity, beta_g and sigma from the objective,
  /// beta_r from the term's smoothness constant.
  static ProblemSpec make(std::shared_ptr<const StochasticObjective> objective,
                          std::shared_ptr<const SmoothableTerm> smooth_term, FeasibleSet set,
                          double alpha_g);

  void validate() const;

  /// G(x) + R(x) (nonsmooth when report_nonsmooth and a term exists).
  double f(const Matrix& x) const;
  /// G(x) + R_mu(x).
  double f_mu(const Matrix& x) const;
  /// grad R_mu(x), or zero without a term.
  Matrix smooth_term_gradient(const Matrix& x) const;
};

enum class ProxMode { kWeak, kExact };

struct RunOptions {
  ProxMode prox_mode = ProxMode::kWeak;
  /// Record wall-clock seconds; off by default so traces are reproducible.
  bool timing = false;
  /// Attached to the trace to compute epoch errors.
  std::optional<double> f_star;
};

struct RunResult {
  Matrix x;
  RunTrace trace;
};

/// Schedule for `spec`, with k_t forced to 0 when the objective's samples
/// cancel in the variance-reduced difference.
Schedule derive_schedule(const ProblemSpec& spec, double epsilon, double C0);

/// Stochastic variance-reduced conditional gradient. Runs schedule.S epochs
/// of schedule.T weak-prox steps each; every step is traced.
RunResult svrgcg_run(const ProblemSpec& spec, const Schedule& schedule,
                     const WeakProxConfig& prox_cfg, const Matrix& x1, std::uint64_t seed,
                     const RunOptions& options = {});

/// Finite-sum variant: the snapshot is the exact average gradient.
RunResult finite_sum_run(const ProblemSpec& spec, const Schedule& schedule,
                         const WeakProxConfig& prox_cfg, const Matrix& x1, std::uint64_t seed,
                         const RunOptions& options = {});

struct SmoothedOptions {
  /// Defaults to f(x1), i.e. a zero lower bound on f.
  std::optional<double> C0;
  /// Defaults to choose_mu for the term kind.
  std::optional<double> mu;
  RunOptions run;
};

struct SmoothedResult {
  Matrix x;
  RunTrace trace;
  Schedule schedule;
  double mu = 0.0;
  ProblemSpec spec;
};

/// Smooths R with mu (choose_mu unless overridden), sets the oracle tolerance
/// to delta_1 = 7 eps / (32 alpha), derives the schedule and runs svrgcg_run.
/// `spec.smooth_term` supplies the term; its current mu is replaced.
SmoothedResult smoothed_solve(const ProblemSpec& spec, double epsilon,
                              const WeakProxConfig& prox_cfg, const Matrix& x1,
                              std::uint64_t seed, const SmoothedOptions& options = {});

}  // namespace vrcg
