#include "vrcg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "vrcg/errors.hpp"
#include "vrcg/rng.hpp"

namespace vrcg {
namespace {

constexpr double kSymmetryTolerance = 1e-10;

// Modified Gram-Schmidt against `fixed` leading columns of q, two passes
// ("twice is enough"). Columns that collapse are replaced by fresh Gaussian
// directions so the block always keeps full column rank.
void orthonormalize_columns(Matrix& q, Index fixed, Rng& rng) {
  const Index n = q.rows();
  for (Index j = fixed; j < q.cols(); ++j) {
    const double original = q.col(j).norm();
    for (int attempt = 0;; ++attempt) {
      for (int pass = 0; pass < 2; ++pass)
        for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      const double norm = q.col(j).norm();
      if (norm > 1e-10 * std::max(original, 1e-300) && norm > 0.0) {
        q.col(j) /= norm;
        break;
      }
      if (attempt > 8) throw ConvergenceError("orthonormalization failed", norm);
      q.col(j) = rng.normal_vector(n);
    }
  }
}

void orthonormalize_columns(Matrix& q, Rng& rng) { orthonormalize_columns(q, 0, rng); }

// Largest-magnitude entry of each left vector is made positive.
void canonicalize_signs(Matrix& left, Matrix& right) {
  for (Index i = 0; i < left.cols(); ++i) {
    Index arg = 0;
    left.col(i).cwiseAbs().maxCoeff(&arg);
    if (left(arg, i) < 0.0) {
      left.col(i) = -left.col(i);
      right.col(i) = -right.col(i);
    }
  }
}

void canonicalize_signs(Matrix& vectors) {
  for (Index i = 0; i < vectors.cols(); ++i) {
    Index arg = 0;
    vectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, i) < 0.0) vectors.col(i) = -vectors.col(i);
  }
}

void require_symmetric(const Matrix& a, const char* context) {
  if (a.rows() != a.cols())
    throw DomainError(std::string(context) + ": matrix is not square");
  if (!is_symmetric(a, kSymmetryTolerance))
    throw DomainError(std::string(context) + ": matrix is not symmetric");
}

// Subspace iteration for a tall (rows >= cols) matrix.
TruncatedSvd truncated_svd_tall(const Matrix& a, Index r, std::uint64_t seed,
                                const SubspaceIterationOptions& opt) {
  const Index n = a.cols();
  const Index block = std::min(r + opt.oversampling, n);
  Rng rng(seed);

  Matrix q = a * rng.normal_matrix(n, block);
  orthonormalize_columns(q, rng);

  double residual = 0.0;
  for (Index sweep = 0;; ++sweep) {
    if (sweep > 0) {
      for (Index it = 0; it < opt.power_iterations; ++it) {
        Matrix w = a.transpose() * q;
        orthonormalize_columns(w, rng);
        q = a * w;
        orthonormalize_columns(q, rng);
      }
    }

    const Matrix b = q.transpose() * a;
    Eigen::JacobiSVD<Matrix> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSvd out;
    out.left = q * small.matrixU().leftCols(r);
    out.values = small.singularValues().head(r);
    out.right = small.matrixV().leftCols(r);

    const double scale = small.singularValues()(0);
    if (scale == 0.0) {
      out.residual = 0.0;
      canonicalize_signs(out.left, out.right);
      return out;
    }
    residual = 0.0;
    for (Index i = 0; i < r; ++i) {
      const double res = (a * out.right.col(i) - out.values(i) * out.left.col(i)).norm();
      residual = std::max(residual, res / scale);
    }
    if (residual <= opt.tolerance) {
      out.residual = residual;
      canonicalize_signs(out.left, out.right);
      return out;
    }
    if (sweep >= opt.max_sweeps)
      throw ConvergenceError("truncated_svd: sweep cap reached", residual);
  }
}

// Block Krylov with restart. Each sweep builds span{Q, AQ, ..., A^k Q},
// extracts Ritz pairs, and restarts from the leading Ritz block.
SymmetricEigen top_eigen_block_krylov(const Matrix& a, Index r, std::uint64_t seed,
                                      const SubspaceIterationOptions& opt) {
  const Index n = a.rows();
  const Index block = std::min(r + opt.oversampling, n);
  const Index depth = std::max<Index>(opt.power_iterations, 1);
  Rng rng(seed);

  Matrix start = rng.normal_matrix(n, block);
  orthonormalize_columns(start, rng);

  for (Index sweep = 0;; ++sweep) {
    const Index cap = std::min(n, block * (depth + 1));
    Matrix basis(n, cap);
    Index filled = std::min(block, cap);
    basis.leftCols(filled) = start.leftCols(filled);
    Index prev_begin = 0;
    Index prev_count = filled;
    while (filled < cap) {
      const Index count = std::min(prev_count, cap - filled);
      basis.middleCols(filled, count) = a * basis.middleCols(prev_begin, count);
      // Columns [0, filled) are already orthonormal.
      Matrix view = basis.leftCols(filled + count);
      orthonormalize_columns(view, filled, rng);
      basis.leftCols(filled + count) = view;
      prev_begin = filled;
      prev_count = count;
      filled += count;
    }

    const Matrix projected = symmetric_part(basis.transpose() * a * basis);
    Eigen::SelfAdjointEigenSolver<Matrix> small(projected);
    // Ascending order from Eigen; take the top end.
    const Index k = projected.rows();
    SymmetricEigen out;
    out.values = small.eigenvalues().tail(r).reverse();
    out.vectors = basis * small.eigenvectors().rightCols(r).rowwise().reverse();

    const double scale = small.eigenvalues().cwiseAbs().maxCoeff();
    double residual = 0.0;
    if (scale > 0.0) {
      for (Index i = 0; i < r; ++i) {
        const double res = (a * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
        residual = std::max(residual, res / scale);
      }
    }
    if (residual <= opt.tolerance || k == n) {
      out.residual = residual;
      canonicalize_signs(out.vectors);
      return out;
    }
    if (sweep >= opt.max_sweeps)
      throw ConvergenceError("truncated_symmetric_eigen: sweep cap reached", residual);

    start = basis * small.eigenvectors().rightCols(block).rowwise().reverse();
    orthonormalize_columns(start, rng);
  }
}

}  // namespace

Matrix TruncatedSvd::reconstruct() const {
  return left * values.asDiagonal() * right.transpose();
}

Matrix SymmetricEigen::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* context) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(context) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
}

void require_finite(const Matrix& a, const char* context) {
  if (!a.allFinite()) throw DomainError(std::string(context) + ": non-finite entry");
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_inner");
  return a.cwiseProduct(b).sum();
}

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix symmetric_part(const Matrix& a) {
  Matrix s(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

TruncatedSvd truncated_svd(const Matrix& a, Index r, std::uint64_t seed,
                           const SubspaceIterationOptions& options) {
  require_finite(a, "truncated_svd");
  if (r < 1 || r > std::min(a.rows(), a.cols()))
    throw DomainError("truncated_svd: target rank " + std::to_string(r) + " outside [1, " +
                      std::to_string(std::min(a.rows(), a.cols())) + "]");
  if (a.rows() >= a.cols()) return truncated_svd_tall(a, r, seed, options);

  TruncatedSvd t = truncated_svd_tall(a.transpose(), r, seed, options);
  std::swap(t.left, t.right);
  canonicalize_signs(t.left, t.right);
  return t;
}

TruncatedSvd full_svd(const Matrix& a) {
  require_finite(a, "full_svd");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("full_svd: BDCSVD failed", 0.0);
  TruncatedSvd out;
  out.left = svd.matrixU();
  out.values = svd.singularValues();
  out.right = svd.matrixV();
  canonicalize_signs(out.left, out.right);
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  require_finite(a, "symmetric_eigen");
  require_symmetric(a, "symmetric_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric_part(a));
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("symmetric_eigen: solver failed", 0.0);
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(out.vectors);
  return out;
}

SymmetricEigen truncated_symmetric_eigen(const Matrix& a, Index r, std::uint64_t seed,
                                         SpectrumEnd end,
                                         const SubspaceIterationOptions& options) {
  require_finite(a, "truncated_symmetric_eigen");
  require_symmetric(a, "truncated_symmetric_eigen");
  if (r < 1 || r > a.rows())
    throw DomainError("truncated_symmetric_eigen: target rank " + std::to_string(r) +
                      " outside [1, " + std::to_string(a.rows()) + "]");
  const Matrix sym = symmetric_part(a);
  if (end == SpectrumEnd::kLargest) return top_eigen_block_krylov(sym, r, seed, options);

  SymmetricEigen out = top_eigen_block_krylov(-sym, r, seed, options);
  out.values = -out.values;
  return out;
}

Vector simplex_projection(const Vector& v, double tau) {
  if (!(tau > 0.0)) throw DomainError("simplex_projection: tau must be positive");
  if ((v.array() < 0.0).any())
    throw DomainError("simplex_projection: negative entry");
  if (v.sum() <= tau) return v;

  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - tau) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }
  return (v.array() - threshold).max(0.0).matrix();
}

}  // namespace vrcg
