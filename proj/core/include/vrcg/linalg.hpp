#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace vrcg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rank-r factorization U * diag(s) * V^T.
///
/// `left` is rows x r and `right` is cols x r, both with orthonormal columns;
/// `values` is nonincreasing and nonnegative. `residual` is the largest
/// relative Ritz residual max_i ||A v_i - s_i u_i|| / s_1 reached by the
/// iterative path (zero for the dense path).
struct TruncatedSvd {
  Matrix left;
  Vector values;
  Matrix right;
  double residual = 0.0;

  Index rank() const { return values.size(); }
  Matrix reconstruct() const;
};

/// Eigenpairs of a symmetric matrix with `values` nonincreasing.
struct SymmetricEigen {
  Matrix vectors;
  Vector values;
  double residual = 0.0;

  Matrix reconstruct() const;
};

/// Knobs of the randomized subspace iteration shared by the truncated
/// factorizations. One sweep is `power_iterations` block power steps followed
/// by a Rayleigh-Ritz extraction and a residual check.
struct SubspaceIterationOptions {
  Index oversampling = 5;
  Index power_iterations = 4;
  Index max_sweeps = 200;
  double tolerance = 1e-10;
};

/// Throws DimensionError unless `a` and `b` have equal shapes.
void require_same_shape(const Matrix& a, const Matrix& b, const char* context);

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* context);

double frobenius_inner(const Matrix& a, const Matrix& b);

double nuclear_norm(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol);

/// (a + a^T) / 2, evaluated entrywise so the result is bitwise symmetric.
Matrix symmetric_part(const Matrix& a);

/// Top-r singular triplets by randomized subspace iteration.
///
/// Deterministic in (a, r, seed). Throws DomainError unless
/// 1 <= r <= min(rows, cols), ConvergenceError when the sweep cap is hit.
TruncatedSvd truncated_svd(const Matrix& a, Index r, std::uint64_t seed,
                           const SubspaceIterationOptions& options = {});

/// Dense SVD with r = min(rows, cols).
TruncatedSvd full_svd(const Matrix& a);

/// Full spectral decomposition; throws DomainError on non-square or
/// asymmetric (beyond 1e-10) input.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Which end of the spectrum `truncated_symmetric_eigen` extracts.
enum class SpectrumEnd { kLargest, kSmallest };

/// The r algebraically largest (or smallest) eigenpairs of a symmetric matrix.
///
/// Block Krylov iteration with restarts (the smallest end works on -a), so
/// Ritz values converge in algebraic order. Values are returned nonincreasing
/// for kLargest and nondecreasing for kSmallest.
SymmetricEigen truncated_symmetric_eigen(const Matrix& a, Index r, std::uint64_t seed,
                                         SpectrumEnd end = SpectrumEnd::kLargest,
                                         const SubspaceIterationOptions& options = {});

/// Euclidean projection of a nonnegative vector onto {x >= 0, sum(x) <= tau}.
///
/// Sort-and-threshold. Returns `v` unchanged when it is already feasible.
Vector simplex_projection(const Vector& v, double tau);

}  // namespace vrcg
