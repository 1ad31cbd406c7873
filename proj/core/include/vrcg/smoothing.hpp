#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vrcg/linalg.hpp"

namespace vrcg {

/// Smoothing certificate of a nonsmooth term R: for the mu-smooth surrogate
/// R_mu,  R - gamma1 mu <= R_mu <= R + gamma2 mu  and grad R_mu is
/// (K + theta / mu)-Lipschitz.
struct SmoothableSpec {
  double theta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double K = 0.0;
  double mu = 1.0;

  double gamma() const { return gamma1 + gamma2; }
  double smoothness() const { return K + theta / mu; }
};

enum class TermKind { kHuberL1, kLogSumExpMax, kElasticNet };

struct SandwichResult {
  bool lower_ok;
  bool upper_ok;
};

/// A nonsmooth convex term together with its mu-smooth surrogate.
class SmoothableTerm {
 public:
  virtual ~SmoothableTerm() = default;

  virtual TermKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual SmoothableSpec spec() const = 0;

  /// R_mu(x).
  virtual double smooth_value(const Matrix& x) const = 0;
  /// grad R_mu(x).
  virtual Matrix smooth_gradient(const Matrix& x) const = 0;
  /// The original nonsmooth R(x), evaluated exactly.
  virtual double nonsmooth_value(const Matrix& x) const = 0;

  /// Strong convexity this term contributes to G + R (nonzero for elastic net).
  virtual double strong_convexity() const { return 0.0; }

  /// Same term with a different smoothing parameter.
  virtual std::shared_ptr<const SmoothableTerm> with_mu(double mu) const = 0;

  double smoothness_constant() const { return spec().smoothness(); }

  /// R - gamma1 mu <= R_mu and R_mu <= R + gamma2 mu at x (with a relative
  /// rounding slack of 1e-12).
  SandwichResult sandwich_check(const Matrix& x) const;
};

/// One-dimensional Huber function H_mu.
double huber_value(double t, double mu);

/// lambda * sum_ij H_mu(X_ij), surrogate of lambda * ||X||_1.
class HuberL1 final : public SmoothableTerm {
 public:
  HuberL1(double lambda, double mu, Index rows, Index cols);

  TermKind kind() const override { return TermKind::kHuberL1; }
  std::string name() const override { return "huber_l1"; }
  SmoothableSpec spec() const override;
  double smooth_value(const Matrix& x) const override;
  Matrix smooth_gradient(const Matrix& x) const override;
  double nonsmooth_value(const Matrix& x) const override;
  std::shared_ptr<const SmoothableTerm> with_mu(double mu) const override;

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

 private:
  void check_shape(const Matrix& x) const;
  double lambda_;
  double mu_;
  Index rows_;
  Index cols_;
};

/// mu * log sum_i exp((<A_i, X> - b_i) / mu), surrogate of max_i (<A_i, X> - b_i).
class LogSumExpMax final : public SmoothableTerm {
 public:
  LogSumExpMax(std::vector<Matrix> constraint_matrices, Vector offsets, double mu);

  TermKind kind() const override { return TermKind::kLogSumExpMax; }
  std::string name() const override { return "log_sum_exp_max"; }
  SmoothableSpec spec() const override;
  double smooth_value(const Matrix& x) const override;
  Matrix smooth_gradient(const Matrix& x) const override;
  double nonsmooth_value(const Matrix& x) const override;
  std::shared_ptr<const SmoothableTerm> with_mu(double mu) const override;

  Index count() const { return static_cast<Index>(matrices_.size()); }
  /// Largest singular value of X -> (<A_1, X>, ..., <A_n, X>).
  double operator_norm() const { return operator_norm_; }

  /// (<A_i, X> - b_i)_i.
  Vector affine_values(const Matrix& x) const;

 private:
  LogSumExpMax(std::vector<Matrix> constraint_matrices, Vector offsets, double mu,
               double operator_norm);
  std::vector<Matrix> matrices_;
  Vector offsets_;
  double mu_;
  double operator_norm_;
};

/// lambda1 * Huber_mu(X) + lambda2 * ||X||_F^2, surrogate of the elastic net.
class ElasticNet final : public SmoothableTerm {
 public:
  ElasticNet(double lambda1, double lambda2, double mu, Index rows, Index cols);

  TermKind kind() const override { return TermKind::kElasticNet; }
  std::string name() const override { return "elastic_net"; }
  SmoothableSpec spec() const override;
  double smooth_value(const Matrix& x) const override;
  Matrix smooth_gradient(const Matrix& x) const override;
  double nonsmooth_value(const Matrix& x) const override;
  double strong_convexity() const override { return 2.0 * lambda2_; }
  std::shared_ptr<const SmoothableTerm> with_mu(double mu) const override;

 private:
  double lambda1_;
  double lambda2_;
  HuberL1 huber_;
};

/// Shape information needed to pick mu for a term kind.
struct SmoothingDims {
  Index rows = 0;
  Index cols = 0;
  /// Number of affine pieces (log-sum-exp only).
  Index pieces = 0;
};

/// Smoothing parameter prescribed for an accuracy target:
/// Huber / elastic net mu = 7 eps / (46 m d), log-sum-exp mu = 7 eps / (92 log n),
/// falling back to mu = eps when n = 1 (the term is affine).
double choose_mu(double epsilon, TermKind kind, const SmoothingDims& dims);

}  // namespace vrcg
