#include "vrcg/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vrcg/errors.hpp"

namespace vrcg {
namespace {

constexpr Index kScgBatchCap = 10'000;
constexpr Index kScgsBatchCap = 1'000'000;

double seconds_since(std::chrono::steady_clock::time_point start, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool should_stop(const BaselineConfig& config, double f, std::uint64_t rank1) {
  if (config.stop_gap && config.f_star && f - *config.f_star <= *config.stop_gap) return true;
  return config.max_rank1 && rank1 >= *config.max_rank1;
}

Matrix estimate_gradient(const ProblemSpec& spec, const Matrix& x, Index batch, Rng& rng) {
  return spec.objective->mean_gradient(x, batch, rng) + spec.smooth_term_gradient(x);
}

void check_start(const ProblemSpec& spec, const BaselineConfig& config, const Matrix& x1) {
  spec.validate();
  config.validate();
  if (x1.rows() != spec.objective->rows() || x1.cols() != spec.objective->cols())
    throw DimensionError("baseline: x1 shape differs from the objective");
  if (!spec.set.contains(x1)) throw DomainError("baseline: x1 is infeasible");
}

}  // namespace

LMOResult lmo(const Matrix& gradient, const FeasibleSet& set, std::uint64_t seed) {
  require_finite(gradient, "lmo");
  const double tau = set.tau();
  LMOResult out;
  if (set.is_psd_cone()) {
    if (gradient.rows() != gradient.cols()) throw DimensionError("lmo: PSD cone needs square input");
    const SymmetricEigen eig =
        truncated_symmetric_eigen(symmetric_part(gradient), 1, seed, SpectrumEnd::kSmallest);
    if (eig.values(0) < 0.0) {
      const Vector u = eig.vectors.col(0);
      out.vertex = tau * (u * u.transpose());
      out.vertex = symmetric_part(out.vertex);
    } else {
      out.vertex = Matrix::Zero(gradient.rows(), gradient.cols());
    }
  } else {
    if (gradient.isZero(0.0)) {
      out.vertex = Matrix::Zero(gradient.rows(), gradient.cols());
      out.vertex(0, 0) = -tau;
    } else {
      const TruncatedSvd svd = truncated_svd(gradient, 1, seed);
      out.vertex = -tau * (svd.left.col(0) * svd.right.col(0).transpose());
    }
  }
  out.duality_gap_contribution = frobenius_inner(gradient, out.vertex);
  return out;
}

void BaselineConfig::validate() const {
  if (max_outer < 1) throw DomainError("BaselineConfig: max_outer must be >= 1");
  if (scgs_inner_cap < 1) throw DomainError("BaselineConfig: scgs_inner_cap must be >= 1");
  if (stop_gap && !f_star) throw DomainError("BaselineConfig: stop_gap needs f_star");
}

RunResult scg_run(const ProblemSpec& spec, const BaselineConfig& config, const Matrix& x1,
                  std::uint64_t seed) {
  check_start(spec, config, x1);
  const auto batch_of = config.batch_schedule
                            ? config.batch_schedule
                            : std::function<Index(Index)>([](Index t) {
                                return std::min<Index>(t * t, kScgBatchCap);
                              });
  const auto start = std::chrono::steady_clock::now();
  RunResult result{x1, {}};
  result.trace.f_star = config.f_star;
  Matrix& x = result.x;
  std::uint64_t grads = 0;
  std::uint64_t rank1 = 0;

  for (Index t = 1; t <= config.max_outer; ++t) {
    const Index batch = batch_of(t);
    if (batch < 1) throw DomainError("scg_run: batch size must be >= 1");
    Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(t), 0});
    const Matrix g = estimate_gradient(spec, x, batch, rng);
    grads += static_cast<std::uint64_t>(batch);
    const LMOResult step = lmo(g, spec.set, derive_seed(seed, {static_cast<std::uint64_t>(t), 1}));
    rank1 += 1;
    const double eta = 2.0 / static_cast<double>(t + 1);
    x = (1.0 - eta) * x + eta * step.vertex;

    TraceRecord rec;
    rec.epoch = t;
    rec.inner_step = 0;
    rec.f = spec.f(x);
    rec.f_mu = spec.f_mu(x);
    rec.stoch_grads = grads;
    rec.rank1_svd_equiv = rank1;
    rec.wall_seconds = seconds_since(start, config.timing);
    result.trace.records.push_back(rec);
    if (should_stop(config, rec.f, rank1)) break;
  }
  return result;
}

RunResult scgs_run(const ProblemSpec& spec, const BaselineConfig& config, const Matrix& x1,
                   std::uint64_t seed) {
  check_start(spec, config, x1);
  const double L = spec.constants.beta;
  const double D = spec.set.diameter();
  const double sigma = spec.constants.sigma;
  const auto batch_of =
      config.batch_schedule
          ? config.batch_schedule
          : std::function<Index(Index)>([=](Index k) {
              const double k2 = static_cast<double>(k + 2);
              const double b = std::ceil(sigma * sigma * k2 * k2 * k2 / (L * L * D * D));
              return static_cast<Index>(std::clamp(b, 1.0, static_cast<double>(kScgsBatchCap)));
            });

  const auto start = std::chrono::steady_clock::now();
  RunResult result{x1, {}};
  result.trace.f_star = config.f_star;
  Matrix x = x1;
  Matrix& y = result.x;
  std::uint64_t grads = 0;
  std::uint64_t rank1 = 0;

  for (Index k = 1; k <= config.max_outer; ++k) {
    const double kd = static_cast<double>(k);
    const double gamma = 3.0 / (kd + 2.0);
    const double beta_k = 4.0 * L / (kd + 2.0);
    const double eta_k = L * D * D / (kd * (kd + 1.0));

    const Matrix z = (1.0 - gamma) * y + gamma * x;
    const Index batch = batch_of(k);
    if (batch < 1) throw DomainError("scgs_run: batch size must be >= 1");
    Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(k), 0});
    const Matrix g = estimate_gradient(spec, z, batch, rng);
    grads += static_cast<std::uint64_t>(batch);

    // min_u <g, u> + (beta_k / 2) ||u - x||^2 by conditional gradient.
    Matrix u = x;
    for (Index t = 1; t <= config.scgs_inner_cap; ++t) {
      const Matrix phi_grad = g + beta_k * (u - x);
      const LMOResult step = lmo(phi_grad, spec.set,
                                 derive_seed(seed, {static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(t)}));
      rank1 += 1;
      const Matrix dir = step.vertex - u;
      const double gap = -frobenius_inner(phi_grad, dir);
      if (gap <= eta_k) break;
      const double curvature = beta_k * dir.squaredNorm();
      const double a = curvature > 0.0 ? std::min(1.0, gap / curvature) : 1.0;
      u = (1.0 - a) * u + a * step.vertex;
    }
    x = u;
    y = (1.0 - gamma) * y + gamma * x;

    TraceRecord rec;
    rec.epoch = k;
    rec.inner_step = 0;
    rec.f = spec.f(y);
    rec.f_mu = spec.f_mu(y);
    rec.stoch_grads = grads;
    rec.rank1_svd_equiv = rank1;
    rec.wall_seconds = seconds_since(start, config.timing);
    result.trace.records.push_back(rec);
    if (should_stop(config, rec.f, rank1)) break;
  }
  return result;
}

}  // namespace vrcg
