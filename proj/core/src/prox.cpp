#include "vrcg/prox.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vrcg/errors.hpp"

namespace vrcg {
namespace {

Matrix project_psd_spectrum(const Matrix& vectors, const Vector& values, double tau) {
  const Vector clipped = values.cwiseMax(0.0);
  const Vector projected = simplex_projection(clipped, tau);
  return symmetric_part(vectors * projected.asDiagonal() * vectors.transpose());
}

}  // namespace

FeasibleSet FeasibleSet::nuclear_ball(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("nuclear_ball: tau must be positive");
  return FeasibleSet(NuclearBall{tau});
}

FeasibleSet FeasibleSet::trace_psd_cone(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw DomainError("trace_psd_cone: tau must be positive");
  return FeasibleSet(TracePsdCone{tau});
}

double FeasibleSet::tau() const {
  return std::visit([](const auto& s) { return s.tau; }, variant_);
}

bool FeasibleSet::contains(const Matrix& x, double tol) const {
  if (!x.allFinite()) return false;
  if (!is_psd_cone()) return nuclear_norm(x) <= tau() + tol;

  if (x.rows() != x.cols()) return false;
  if ((x - x.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_part(x), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol && x.trace() <= tau() + tol;
}

double FeasibleSet::indicator(const Matrix& x, double tol) const {
  return contains(x, tol) ? 0.0 : std::numeric_limits<double>::infinity();
}

double FeasibleSet::diameter() const {
  return is_psd_cone() ? std::sqrt(2.0) * tau() : 2.0 * tau();
}

ProxQuery::ProxQuery(Matrix c, double s, FeasibleSet fs)
    : center(std::move(c)), scale(s), set(fs) {
  if (!(scale > 0.0)) throw DomainError("ProxQuery: scale must be positive");
  require_finite(center, "ProxQuery");
  if (set.is_psd_cone() && center.rows() != center.cols())
    throw DimensionError("ProxQuery: PSD-cone center must be square");
}

void WeakProxConfig::validate() const {
  if (target_rank < 1) throw DomainError("WeakProxConfig: target_rank must be >= 1");
  if (!(delta >= 0.0)) throw DomainError("WeakProxConfig: delta must be nonnegative");
}

double psi_value(const Matrix& v, const ProxQuery& query) {
  require_same_shape(v, query.center, "psi_value");
  const double h = query.set.indicator(v);
  if (std::isinf(h)) return h;
  return (v - query.center).squaredNorm();
}

Matrix exact_prox(const ProxQuery& query) {
  const double tau = query.set.tau();
  if (query.set.is_psd_cone()) {
    const SymmetricEigen eig = symmetric_eigen(symmetric_part(query.center));
    return project_psd_spectrum(eig.vectors, eig.values, tau);
  }
  const TruncatedSvd svd = full_svd(query.center);
  const Vector projected = simplex_projection(svd.values, tau);
  return svd.left * projected.asDiagonal() * svd.right.transpose();
}

WeakProxResult weak_prox(const ProxQuery& query, const WeakProxConfig& config,
                         std::uint64_t seed) {
  config.validate();
  const Index max_rank = std::min(query.center.rows(), query.center.cols());
  if (config.target_rank > max_rank)
    throw DomainError("weak_prox: target rank " + std::to_string(config.target_rank) +
                      " exceeds " + std::to_string(max_rank));
  const double tau = query.set.tau();

  WeakProxResult out;
  if (query.set.is_psd_cone()) {
    const SymmetricEigen eig = truncated_symmetric_eigen(symmetric_part(query.center),
                                                         config.target_rank, seed);
    out.point = project_psd_spectrum(eig.vectors, eig.values, tau);
    out.residual = eig.residual;
    return out;
  }
  const TruncatedSvd svd = truncated_svd(query.center, config.target_rank, seed);
  const Vector projected = simplex_projection(svd.values, tau);
  out.point = svd.left * projected.asDiagonal() * svd.right.transpose();
  out.residual = svd.residual;
  return out;
}

bool check_weak_guarantee(const Matrix& candidate, const Matrix& reference,
                          const ProxQuery& query, double delta) {
  return psi_value(candidate, query) <= psi_value(reference, query) + delta;
}

}  // namespace vrcg
