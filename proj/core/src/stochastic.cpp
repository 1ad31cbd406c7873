#include "vrcg/stochastic.hpp"

#include <cmath>
#include <string>

#include "vrcg/errors.hpp"

namespace vrcg {

Matrix StochasticObjective::mean_gradient(const Matrix& x, Index k, Rng& rng) const {
  if (k < 1) throw DomainError("mean_gradient: k must be >= 1");
  Matrix sum = gradient(x, draw(rng));
  for (Index i = 1; i < k; ++i) sum += gradient(x, draw(rng));
  return sum / static_cast<double>(k);
}

Matrix StochasticObjective::deterministic_difference(const Matrix&, const Matrix&) const {
  throw DomainError("deterministic_difference: samples of this objective do not cancel");
}

// ---------------------------------------------------------------------------

MatrixEstimationObjective::MatrixEstimationObjective(Matrix mean_matrix, double noise_sigma)
    : mean_(std::move(mean_matrix)), noise_sigma_(noise_sigma) {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw DomainError("MatrixEstimationObjective: noise_sigma must be nonnegative");
  if (mean_.size() == 0) throw DomainError("MatrixEstimationObjective: empty mean matrix");
  require_finite(mean_, "MatrixEstimationObjective");
}

double MatrixEstimationObjective::sigma() const {
  return noise_sigma_ * std::sqrt(static_cast<double>(mean_.size()));
}

SampleToken MatrixEstimationObjective::draw(Rng& rng) const { return {rng.next_u64()}; }

Matrix MatrixEstimationObjective::gradient(const Matrix& x, SampleToken token) const {
  require_same_shape(x, mean_, "MatrixEstimationObjective::gradient");
  if (noise_sigma_ == 0.0) return x - mean_;
  Rng noise(token.value);
  return x - mean_ - noise_sigma_ * noise.normal_matrix(rows(), cols());
}

Matrix MatrixEstimationObjective::exact_gradient(const Matrix& x) const {
  require_same_shape(x, mean_, "MatrixEstimationObjective::exact_gradient");
  return x - mean_;
}

double MatrixEstimationObjective::value(const Matrix& x) const {
  require_same_shape(x, mean_, "MatrixEstimationObjective::value");
  return 0.5 * (x - mean_).squaredNorm();
}

Matrix MatrixEstimationObjective::mean_gradient(const Matrix& x, Index k, Rng& rng) const {
  if (k < 1) throw DomainError("mean_gradient: k must be >= 1");
  require_same_shape(x, mean_, "MatrixEstimationObjective::mean_gradient");
  if (noise_sigma_ == 0.0) return x - mean_;
  const double scale = noise_sigma_ / std::sqrt(static_cast<double>(k));
  return x - mean_ - scale * rng.normal_matrix(rows(), cols());
}

Matrix MatrixEstimationObjective::deterministic_difference(const Matrix& x,
                                                           const Matrix& y) const {
  return x - y;
}

// ---------------------------------------------------------------------------

double WeightedQuadratic::value(const Matrix& x) const {
  return 0.5 * (weights.array() * (x - target).array().square()).sum();
}

Matrix WeightedQuadratic::gradient(const Matrix& x) const {
  return (weights.array() * (x - target).array()).matrix();
}

FiniteSumObjective::FiniteSumObjective(std::vector<WeightedQuadratic> components)
    : parts_(std::move(components)) {
  if (parts_.empty()) throw DomainError("FiniteSumObjective: need at least one component");
  const Matrix& w0 = parts_.front().weights;
  weight_sum_ = Matrix::Zero(w0.rows(), w0.cols());
  weighted_target_sum_ = Matrix::Zero(w0.rows(), w0.cols());
  beta_g_ = 0.0;
  for (const WeightedQuadratic& p : parts_) {
    require_same_shape(p.weights, w0, "FiniteSumObjective");
    require_same_shape(p.target, w0, "FiniteSumObjective");
    if (!(p.weights.minCoeff() > 0.0))
      throw DomainError("FiniteSumObjective: weights must be positive");
    weight_sum_ += p.weights;
    weighted_target_sum_ += p.weights.cwiseProduct(p.target);
    beta_g_ = std::max(beta_g_, p.weights.maxCoeff());
  }
}

FiniteSumObjective FiniteSumObjective::random(Index n, Index rows, Index cols, double weight_lo,
                                              double weight_hi, double target_scale, Rng& rng) {
  if (n < 1) throw DomainError("FiniteSumObjective::random: n must be >= 1");
  if (!(weight_lo > 0.0) || weight_hi < weight_lo)
    throw DomainError("FiniteSumObjective::random: need 0 < weight_lo <= weight_hi");
  std::vector<WeightedQuadratic> parts;
  parts.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    WeightedQuadratic q;
    q.weights.resize(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) q.weights(r, c) = rng.uniform(weight_lo, weight_hi);
    q.target = target_scale * rng.normal_matrix(rows, cols);
    parts.push_back(std::move(q));
  }
  return FiniteSumObjective(std::move(parts));
}

double FiniteSumObjective::sigma() const {
  // Spread of the component gradients around grad G, measured at the
  // unconstrained minimizer. Finite-sum runs use the exact snapshot and do
  // not consume this value.
  const Matrix x = unconstrained_minimizer();
  const Matrix mean = exact_gradient(x);
  double sum = 0.0;
  for (const WeightedQuadratic& p : parts_) sum += (p.gradient(x) - mean).squaredNorm();
  return std::sqrt(sum / static_cast<double>(parts_.size()));
}

SampleToken FiniteSumObjective::draw(Rng& rng) const {
  return {static_cast<std::uint64_t>(rng.uniform_int(0, components() - 1))};
}

Matrix FiniteSumObjective::gradient(const Matrix& x, SampleToken token) const {
  if (token.value >= parts_.size()) throw DomainError("FiniteSumObjective: bad sample token");
  require_same_shape(x, weight_sum_, "FiniteSumObjective::gradient");
  return parts_[token.value].gradient(x);
}

Matrix FiniteSumObjective::exact_gradient(const Matrix& x) const {
  require_same_shape(x, weight_sum_, "FiniteSumObjective::exact_gradient");
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  for (const WeightedQuadratic& p : parts_) sum += p.gradient(x);
  return sum / static_cast<double>(parts_.size());
}

double FiniteSumObjective::value(const Matrix& x) const {
  require_same_shape(x, weight_sum_, "FiniteSumObjective::value");
  double sum = 0.0;
  for (const WeightedQuadratic& p : parts_) sum += p.value(x);
  return sum / static_cast<double>(parts_.size());
}

double FiniteSumObjective::strong_convexity() const {
  return weight_sum_.minCoeff() / static_cast<double>(parts_.size());
}

Matrix FiniteSumObjective::unconstrained_minimizer() const {
  return weighted_target_sum_.cwiseQuotient(weight_sum_);
}

// ---------------------------------------------------------------------------

VRGradientState snapshot_gradient(const StochasticObjective& obj, const Matrix& x, Index k_s,
                                  Rng& rng) {
  if (k_s < 0) throw DomainError("snapshot_gradient: negative sample count");
  VRGradientState state;
  state.snapshot_point = x;
  if (obj.is_finite_sum()) {
    state.snapshot_gradient = obj.exact_gradient(x);
    state.snapshot_sample_count = obj.components();
  } else if (k_s == 0) {
    state.snapshot_gradient = obj.exact_gradient(x);
    state.snapshot_sample_count = 0;
  } else {
    state.snapshot_gradient = obj.mean_gradient(x, k_s, rng);
    state.snapshot_sample_count = k_s;
  }
  return state;
}

GradientEstimate vr_gradient(const StochasticObjective& obj, const VRGradientState& state,
                             const Matrix& x, Index k_t, Rng& rng) {
  if (k_t < 0) throw DomainError("vr_gradient: negative sample count");
  require_same_shape(x, state.snapshot_point, "vr_gradient");
  GradientEstimate out;
  if (obj.samples_cancel()) {
    out.gradient = obj.deterministic_difference(x, state.snapshot_point) + state.snapshot_gradient;
    out.samples_used = 0;
    return out;
  }
  if (k_t == 0) {
    out.gradient = state.snapshot_gradient;
    return out;
  }
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  double sq_norms = 0.0;
  for (Index i = 0; i < k_t; ++i) {
    const SampleToken token = obj.draw(rng);
    const Matrix diff = obj.gradient(x, token) - obj.gradient(state.snapshot_point, token);
    sum += diff;
    sq_norms += diff.squaredNorm();
  }
  const double k = static_cast<double>(k_t);
  const Matrix mean = sum / k;
  out.gradient = mean + state.snapshot_gradient;
  out.samples_used = k_t;
  if (k_t >= 2)
    out.empirical_variance_proxy = std::max(0.0, (sq_norms - k * mean.squaredNorm()) / (k - 1.0));
  return out;
}

}  // namespace vrcg
