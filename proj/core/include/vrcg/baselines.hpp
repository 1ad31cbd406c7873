#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "vrcg/prox.hpp"
#include "vrcg/solver.hpp"
#include "vrcg/trace.hpp"

namespace vrcg {

// Reference implementations of stochastic conditional gradient (SCG) and
// stochastic conditional gradient sliding (SCGS) following the experimental
// protocol they are compared under; not certified reproductions of the
// original works.

struct LMOResult {
  /// argmin over the feasible set of <gradient, Z>: rank one, extreme (or 0).
  Matrix vertex;
  /// <gradient, vertex>; the duality gap at x is <gradient, x> minus this.
  double duality_gap_contribution = 0.0;
};

/// Nuclear ball: -tau u1 v1^T for the top singular pair of the gradient.
/// PSD cone: tau u u^T for the eigenvector of the most negative eigenvalue of
/// the gradient's symmetric part, or the zero matrix when none is negative.
LMOResult lmo(const Matrix& gradient, const FeasibleSet& set, std::uint64_t seed);

enum class BaselineMethod { kSCG, kSCGS };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kSCG;
  Index max_outer = 1000;
  /// Minibatch size at outer iteration t (1-based). Defaults to min(t^2, 10^4)
  /// for SCG and ceil(sigma^2 (t+2)^3 / (L^2 D^2)) capped at 10^6 for SCGS.
  std::function<Index(Index)> batch_schedule;
  /// Inner conditional-gradient iterations per SCGS prox subproblem.
  Index scgs_inner_cap = 1;
  /// Stop once f - f_star <= stop_gap (requires f_star).
  std::optional<double> stop_gap;
  std::optional<double> f_star;
  /// Stop once this many rank-one SVD equivalents have been spent.
  std::optional<std::uint64_t> max_rank1;
  bool timing = false;

  void validate() const;
};

/// Stochastic Frank-Wolfe: x <- (1 - 2/(t+1)) x + 2/(t+1) lmo(grad estimate).
RunResult scg_run(const ProblemSpec& spec, const BaselineConfig& config, const Matrix& x1,
                  std::uint64_t seed);

/// Stochastic conditional gradient sliding with gamma_k = 3/(k+2),
/// beta_k = 4L/(k+2), eta_k = L D^2 / (k(k+1)); each prox subproblem is solved
/// by at most scgs_inner_cap conditional-gradient steps with exact line search.
RunResult scgs_run(const ProblemSpec& spec, const BaselineConfig& config, const Matrix& x1,
                   std::uint64_t seed);

}  // namespace vrcg
