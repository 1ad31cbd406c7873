#pragma once

#include <cstdint>

#include "vrcg/linalg.hpp"

namespace vrcg {

/// Strong convexity and smoothness constants of G + R.
struct ProblemConstants {
  double alpha = 1.0;
  double beta_g = 0.0;
  double beta_r = 0.0;
  double beta = 0.0;
  double sigma = 0.0;

  /// Builds the constants with beta = beta_g + beta_r and validates them.
  static ProblemConstants make(double alpha, double beta_g, double beta_r, double sigma);

  /// Throws DomainError unless alpha > 0, alpha <= beta, beta = beta_g + beta_r
  /// and every entry is finite and nonnegative.
  void validate() const;
};

enum class Variant { kStochastic, kFiniteSum };

/// Per-epoch snapshot sizes above this are clamped (and flagged in the trace).
inline constexpr Index kSnapshotSampleCap = 1'000'000;

struct Schedule {
  /// Inner iterations per epoch.
  Index T = 1;
  double eta = 1.0;
  Index k_t = 0;
  Index k_s_base = 0;
  /// Number of epochs.
  Index S = 1;
  /// Weak-oracle tolerance fed to the error bound.
  double delta = 0.0;
  double C0 = 1.0;
  double alpha = 1.0;
  double epsilon = 1.0;

  /// k_s_base * 2^(s-1), clamped to kSnapshotSampleCap.
  Index k_s(Index s) const;
  /// True when the doubling rule exceeds the cap at epoch s.
  bool k_s_capped(Index s) const;
};

/// T = ceil(8 beta / (3 alpha) ln 8 + 1), eta = alpha / (2 beta),
/// k_t = ceil(32 beta_g^2 / alpha^2), k_s_base = ceil(32 sigma^2 / (alpha C0)),
/// S = max(1, ceil(log2(C0 / epsilon)) + 2), delta = 7 epsilon / (16 alpha).
Schedule derive_schedule(const ProblemConstants& constants, double epsilon, double C0);

/// C0 (1/2)^(s-1) + 8 alpha delta / 7, or C0 (5/12)^(s-1) + 8 alpha delta / 7
/// for the finite-sum variant.
double predicted_error(const Schedule& schedule, Index s, Variant variant);

/// Samples consumed by a full run: S T k_t plus the snapshot sizes
/// (sum_s k_s in the stochastic case, S n in the finite-sum case).
/// Uncapped stochastic snapshots sum in closed form to k_s_base (2^S - 1).
std::uint64_t total_stochastic_gradients(const Schedule& schedule, Variant variant,
                                         Index finite_sum_n = 0);

}  // namespace vrcg
