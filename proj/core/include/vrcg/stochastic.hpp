#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "vrcg/linalg.hpp"
#include "vrcg/rng.hpp"

namespace vrcg {

/// Identifies one draw g ~ D. Gradient evaluation is a deterministic function
/// of (point, token), so the same component can be evaluated at X_{s,t} and
/// at the snapshot X_s.
struct SampleToken {
  std::uint64_t value;
};

/// G(X) = E_{g ~ D}[g(X)] accessed through a sampling oracle.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// Smoothness of every component g.
  virtual double beta_g() const = 0;
  /// Bound on sqrt(E ||grad G - grad g||^2).
  virtual double sigma() const = 0;

  virtual SampleToken draw(Rng& rng) const = 0;
  virtual Matrix gradient(const Matrix& x, SampleToken token) const = 0;

  /// Exact grad G and G, for diagnostics and reporting.
  virtual Matrix exact_gradient(const Matrix& x) const = 0;
  virtual double value(const Matrix& x) const = 0;

  /// Mean of k sampled gradients at x. The default draws and averages; an
  /// override may return any estimator with the same distribution.
  virtual Matrix mean_gradient(const Matrix& x, Index k, Rng& rng) const;

  /// True when grad g_i(X) - grad g_i(Y) does not depend on the sample,
  /// which lets the inner loop skip sampling altogether.
  virtual bool samples_cancel() const { return false; }
  /// grad g(x) - grad g(y) for any g; only meaningful when samples_cancel().
  virtual Matrix deterministic_difference(const Matrix& x, const Matrix& y) const;

  /// Finite-sum objectives expose the exact snapshot path.
  virtual bool is_finite_sum() const { return false; }
  /// Component count for finite sums (0 otherwise).
  virtual Index components() const { return 0; }
};

/// Observations M^(i) = M0 + noise_sigma Q^(i) with Q^(i) entrywise standard
/// Gaussian; g_i has gradient X - M^(i), so G(X) = ||X - M0||^2 / 2.
class MatrixEstimationObjective final : public StochasticObjective {
 public:
  MatrixEstimationObjective(Matrix mean_matrix, double noise_sigma);

  Index rows() const override { return mean_.rows(); }
  Index cols() const override { return mean_.cols(); }
  double beta_g() const override { return 1.0; }
  double sigma() const override;

  SampleToken draw(Rng& rng) const override;
  Matrix gradient(const Matrix& x, SampleToken token) const override;
  Matrix exact_gradient(const Matrix& x) const override;
  double value(const Matrix& x) const override;

  /// The average of k observations is M0 + (noise_sigma / sqrt(k)) Z with Z
  /// standard Gaussian, so one draw replaces k.
  Matrix mean_gradient(const Matrix& x, Index k, Rng& rng) const override;

  bool samples_cancel() const override { return true; }
  Matrix deterministic_difference(const Matrix& x, const Matrix& y) const override;

  const Matrix& mean_matrix() const { return mean_; }
  double noise_sigma() const { return noise_sigma_; }

 private:
  Matrix mean_;
  double noise_sigma_;
};

/// g(X) = (1/2) sum_jk W_jk (X_jk - M_jk)^2 with positive weights.
struct WeightedQuadratic {
  Matrix weights;
  Matrix target;

  double value(const Matrix& x) const;
  Matrix gradient(const Matrix& x) const;
};

/// G(X) = (1/n) sum_i g_i(X); sampling picks i uniformly.
class FiniteSumObjective final : public StochasticObjective {
 public:
  explicit FiniteSumObjective(std::vector<WeightedQuadratic> components);

  /// n components of shape rows x cols with weights uniform on
  /// [weight_lo, weight_hi] and targets with standard Gaussian entries
  /// scaled by `target_scale`.
  static FiniteSumObjective random(Index n, Index rows, Index cols, double weight_lo,
                                   double weight_hi, double target_scale, Rng& rng);

  Index rows() const override { return parts_.front().weights.rows(); }
  Index cols() const override { return parts_.front().weights.cols(); }
  double beta_g() const override { return beta_g_; }
  double sigma() const override;

  SampleToken draw(Rng& rng) const override;
  Matrix gradient(const Matrix& x, SampleToken token) const override;
  Matrix exact_gradient(const Matrix& x) const override;
  double value(const Matrix& x) const override;

  bool is_finite_sum() const override { return true; }
  Index components() const override { return static_cast<Index>(parts_.size()); }

  /// Strong convexity of G: the smallest entry of the mean weight matrix.
  double strong_convexity() const;
  /// Unconstrained minimizer of G (entrywise weighted mean of the targets).
  Matrix unconstrained_minimizer() const;
  const std::vector<WeightedQuadratic>& parts() const { return parts_; }

 private:
  std::vector<WeightedQuadratic> parts_;
  Matrix weight_sum_;
  Matrix weighted_target_sum_;
  double beta_g_;
};

/// Snapshot data of one epoch.
struct VRGradientState {
  Matrix snapshot_point;
  Matrix snapshot_gradient;
  Index snapshot_sample_count = 0;
};

struct GradientEstimate {
  Matrix gradient;
  Index samples_used = 0;
  /// Mean squared deviation of the per-sample corrected gradients from
  /// their batch mean (unbiased, k_t >= 2 only).
  std::optional<double> empirical_variance_proxy;
};

/// Stochastic: mean of k_s sampled gradients (exact gradient if k_s = 0).
/// Finite-sum: exact (1/n) sum grad g_i regardless of k_s, counting n.
VRGradientState snapshot_gradient(const StochasticObjective& obj, const Matrix& x, Index k_s,
                                  Rng& rng);

/// (1/k_t) sum (grad g_i(x) - grad g_i(X_s)) + snapshot gradient. When the
/// objective's samples cancel, the sum is formed without sampling and
/// samples_used is 0. With k_t = 0 on other objectives the estimate is the
/// snapshot gradient itself.
GradientEstimate vr_gradient(const StochasticObjective& obj, const VRGradientState& state,
                             const Matrix& x, Index k_t, Rng& rng);

}  // namespace vrcg
