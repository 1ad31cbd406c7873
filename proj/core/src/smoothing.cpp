#include "vrcg/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrcg/errors.hpp"

namespace vrcg {
namespace {

void require_positive_mu(double mu, const char* context) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw DomainError(std::string(context) + ": mu must be positive");
}

}  // namespace

SandwichResult SmoothableTerm::sandwich_check(const Matrix& x) const {
  const SmoothableSpec s = spec();
  const double exact = nonsmooth_value(x);
  const double smooth = smooth_value(x);
  const double slack = 1e-12 * std::max({1.0, std::abs(exact), std::abs(smooth)});
  return {exact - s.gamma1 * s.mu <= smooth + slack, smooth <= exact + s.gamma2 * s.mu + slack};
}

double huber_value(double t, double mu) {
  const double a = std::abs(t);
  return a <= mu ? t * t / (2.0 * mu) : a - mu / 2.0;
}

// ---------------------------------------------------------------------------

HuberL1::HuberL1(double lambda, double mu, Index rows, Index cols)
    : lambda_(lambda), mu_(mu), rows_(rows), cols_(cols) {
  if (!(lambda >= 0.0)) throw DomainError("HuberL1: lambda must be nonnegative");
  require_positive_mu(mu, "HuberL1");
  if (rows < 1 || cols < 1) throw DomainError("HuberL1: empty shape");
}

void HuberL1::check_shape(const Matrix& x) const {
  if (x.rows() != rows_ || x.cols() != cols_)
    throw DimensionError("HuberL1: expected " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
}

SmoothableSpec HuberL1::spec() const {
  // Per unit weight (theta, gamma, K) = (1, m d / 2, 0); all of gamma sits on
  // the lower side since R_mu <= ||X||_1.
  const double md = static_cast<double>(rows_) * static_cast<double>(cols_);
  return {.theta = lambda_, .gamma1 = lambda_ * md / 2.0, .gamma2 = 0.0, .K = 0.0, .mu = mu_};
}

double HuberL1::smooth_value(const Matrix& x) const {
  check_shape(x);
  double sum = 0.0;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) sum += huber_value(x(i, j), mu_);
  return lambda_ * sum;
}

Matrix HuberL1::smooth_gradient(const Matrix& x) const {
  check_shape(x);
  return lambda_ * (x.array() / mu_).max(-1.0).min(1.0).matrix();
}

double HuberL1::nonsmooth_value(const Matrix& x) const {
  check_shape(x);
  return lambda_ * x.cwiseAbs().sum();
}

std::shared_ptr<const SmoothableTerm> HuberL1::with_mu(double mu) const {
  return std::make_shared<HuberL1>(lambda_, mu, rows_, cols_);
}

// ---------------------------------------------------------------------------

LogSumExpMax::LogSumExpMax(std::vector<Matrix> constraint_matrices, Vector offsets, double mu)
    : LogSumExpMax(std::move(constraint_matrices), std::move(offsets), mu, -1.0) {}

LogSumExpMax::LogSumExpMax(std::vector<Matrix> constraint_matrices, Vector offsets, double mu,
                           double norm)
    : matrices_(std::move(constraint_matrices)), offsets_(std::move(offsets)), mu_(mu) {
  require_positive_mu(mu, "LogSumExpMax");
  if (matrices_.empty()) throw DomainError("LogSumExpMax: need at least one piece");
  if (static_cast<Index>(matrices_.size()) != offsets_.size())
    throw DimensionError("LogSumExpMax: offsets length differs from matrix count");
  for (const Matrix& a : matrices_) {
    require_same_shape(a, matrices_.front(), "LogSumExpMax");
    require_finite(a, "LogSumExpMax");
  }
  if (norm >= 0.0) {
    operator_norm_ = norm;
    return;
  }
  // Stack vec(A_i) as rows; the operator norm is its top singular value.
  const Index n = count();
  const Index dim = matrices_.front().size();
  Matrix stacked(n, dim);
  for (Index i = 0; i < n; ++i)
    stacked.row(i) = Eigen::Map<const Vector>(matrices_[i].data(), dim).transpose();
  Eigen::BDCSVD<Matrix> svd(stacked);
  operator_norm_ = svd.singularValues()(0);
}

SmoothableSpec LogSumExpMax::spec() const {
  // (theta, gamma, K) = (||A||^2, log n, 0). The surrogate overestimates the
  // max, so gamma sits on the upper side: max <= R_mu <= max + mu log n.
  return {.theta = operator_norm_ * operator_norm_,
          .gamma1 = 0.0,
          .gamma2 = std::log(static_cast<double>(count())),
          .K = 0.0,
          .mu = mu_};
}

Vector LogSumExpMax::affine_values(const Matrix& x) const {
  require_same_shape(x, matrices_.front(), "LogSumExpMax");
  Vector z(count());
  for (Index i = 0; i < count(); ++i) z(i) = matrices_[i].cwiseProduct(x).sum() - offsets_(i);
  return z;
}

double LogSumExpMax::smooth_value(const Matrix& x) const {
  const Vector z = affine_values(x);
  const double top = z.maxCoeff();
  return top + mu_ * std::log(((z.array() - top) / mu_).exp().sum());
}

Matrix LogSumExpMax::smooth_gradient(const Matrix& x) const {
  const Vector z = affine_values(x);
  const double top = z.maxCoeff();
  Vector w = ((z.array() - top) / mu_).exp().matrix();
  w /= w.sum();
  Matrix g = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < count(); ++i) g += w(i) * matrices_[i];
  return g;
}

double LogSumExpMax::nonsmooth_value(const Matrix& x) const { return affine_values(x).maxCoeff(); }

std::shared_ptr<const SmoothableTerm> LogSumExpMax::with_mu(double mu) const {
  return std::shared_ptr<const SmoothableTerm>(
      new LogSumExpMax(matrices_, offsets_, mu, operator_norm_));
}

// ---------------------------------------------------------------------------

ElasticNet::ElasticNet(double lambda1, double lambda2, double mu, Index rows, Index cols)
    : lambda1_(lambda1), lambda2_(lambda2), huber_(lambda1, mu, rows, cols) {
  if (!(lambda2 > 0.0)) throw DomainError("ElasticNet: lambda2 must be positive");
}

SmoothableSpec ElasticNet::spec() const {
  SmoothableSpec s = huber_.spec();
  s.K = 2.0 * lambda2_;
  return s;
}

double ElasticNet::smooth_value(const Matrix& x) const {
  return huber_.smooth_value(x) + lambda2_ * x.squaredNorm();
}

Matrix ElasticNet::smooth_gradient(const Matrix& x) const {
  return huber_.smooth_gradient(x) + 2.0 * lambda2_ * x;
}

double ElasticNet::nonsmooth_value(const Matrix& x) const {
  return huber_.nonsmooth_value(x) + lambda2_ * x.squaredNorm();
}

std::shared_ptr<const SmoothableTerm> ElasticNet::with_mu(double mu) const {
  return std::make_shared<ElasticNet>(lambda1_, lambda2_, mu, huber_.rows(), huber_.cols());
}

// ---------------------------------------------------------------------------

double choose_mu(double epsilon, TermKind kind, const SmoothingDims& dims) {
  if (!(epsilon > 0.0)) throw DomainError("choose_mu: epsilon must be positive");
  switch (kind) {
    case TermKind::kHuberL1:
    case TermKind::kElasticNet: {
      if (dims.rows < 1 || dims.cols < 1) throw DomainError("choose_mu: empty shape");
      const double md = static_cast<double>(dims.rows) * static_cast<double>(dims.cols);
      return 7.0 * epsilon / (46.0 * md);
    }
    case TermKind::kLogSumExpMax: {
      if (dims.pieces < 1) throw DomainError("choose_mu: need at least one piece");
      if (dims.pieces == 1) return epsilon;
      return 7.0 * epsilon / (92.0 * std::log(static_cast<double>(dims.pieces)));
    }
  }
  throw DomainError("choose_mu: unknown term kind");
}

}  // namespace vrcg
