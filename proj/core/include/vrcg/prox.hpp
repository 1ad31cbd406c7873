#pragma once

#include <cstdint>
#include <variant>

#include "vrcg/linalg.hpp"

namespace vrcg {

struct NuclearBall {
  double tau;
};

/// {X symmetric, X >= 0, Tr(X) <= tau}.
struct TracePsdCone {
  double tau;
};

/// The set whose indicator plays the role of the prox-friendly term h.
class FeasibleSet {
 public:
  static FeasibleSet nuclear_ball(double tau);
  static FeasibleSet trace_psd_cone(double tau);

  double tau() const;
  bool is_psd_cone() const { return std::holds_alternative<TracePsdCone>(variant_); }
  const std::variant<NuclearBall, TracePsdCone>& variant() const { return variant_; }

  /// Membership with absolute slack `tol` on the norm/trace bound and on the
  /// smallest eigenvalue (PSD variant; symmetry is checked to `tol` as well).
  bool contains(const Matrix& x, double tol = 1e-8) const;

  /// 0 on the set, +inf off it.
  double indicator(const Matrix& x, double tol = 1e-8) const;

  /// Diameter in Frobenius norm (2 tau for the ball, sqrt(2) tau for the cone).
  double diameter() const;

 private:
  explicit FeasibleSet(std::variant<NuclearBall, TracePsdCone> v) : variant_(v) {}
  std::variant<NuclearBall, TracePsdCone> variant_;
};

/// The prox subproblem min_V ||V - center||^2 + h(V) / scale.
///
/// In the solver, center = X - (grad_G_estimate + grad_R) / (2 beta eta) and
/// scale = beta eta.
struct ProxQuery {
  Matrix center;
  double scale;
  FeasibleSet set;

  ProxQuery(Matrix center, double scale, FeasibleSet set);
};

struct WeakProxConfig {
  Index target_rank = 1;
  /// Tolerance on the weak guarantee psi(V) <= psi(X*) + delta.
  double delta = 0.0;
  /// Distance in objective value of the comparator from the optimum. Only
  /// carried as metadata; no bound in this library consumes it.
  double delta2 = 0.0;

  void validate() const;
};

struct WeakProxResult {
  Matrix point;
  /// Relative Ritz residual of the truncated factorization used.
  double residual = 0.0;
};

/// ||v - center||_F^2 + indicator(v) / scale; +inf when v is infeasible.
double psi_value(const Matrix& v, const ProxQuery& query);

/// Exact minimizer of psi: full factorization of the center (its symmetric
/// part for the cone), spectrum projected onto the tau-simplex.
Matrix exact_prox(const ProxQuery& query);

/// Rank-limited prox: top-`target_rank` factorization of the center, spectrum
/// projected onto the tau-simplex. Optimal among feasible points of rank at
/// most `target_rank`, hence satisfies the weak guarantee against any such
/// comparator.
WeakProxResult weak_prox(const ProxQuery& query, const WeakProxConfig& config,
                         std::uint64_t seed);

/// psi(candidate) <= psi(reference) + delta.
bool check_weak_guarantee(const Matrix& candidate, const Matrix& reference,
                          const ProxQuery& query, double delta);

}  // namespace vrcg
