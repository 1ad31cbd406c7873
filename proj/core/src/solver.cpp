#include "vrcg/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "vrcg/errors.hpp"

namespace vrcg {
namespace {

std::string step_context(Index s, Index t) {
  return "epoch " + std::to_string(s) + ", step " + std::to_string(t) + ": ";
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(Clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  bool enabled_;
  Clock::time_point start_;
};

RunResult run_epochs(const ProblemSpec& spec, const Schedule& schedule,
                     const WeakProxConfig& prox_cfg, const Matrix& x1, std::uint64_t seed,
                     const RunOptions& options, Variant variant) {
  spec.validate();
  prox_cfg.validate();
  const StochasticObjective& obj = *spec.objective;
  if (variant == Variant::kFiniteSum && !obj.is_finite_sum())
    throw DomainError("finite_sum_run: objective is not a finite sum");
  if (x1.rows() != obj.rows() || x1.cols() != obj.cols())
    throw DimensionError("svrgcg_run: x1 shape differs from the objective");
  if (!spec.set.contains(x1)) throw DomainError("svrgcg_run: x1 is infeasible");
  if (schedule.T < 1 || schedule.S < 1) throw DomainError("svrgcg_run: need T, S >= 1");
  if (!(schedule.eta > 0.0 && schedule.eta <= 1.0))
    throw DomainError("svrgcg_run: eta must lie in (0, 1]");
  const double beta = spec.constants.beta;
  if (2.0 * beta * schedule.eta > spec.constants.alpha * (1.0 + 1e-12))
    throw DomainError("svrgcg_run: step size violates 2 beta eta <= alpha");

  const double eta = schedule.eta;
  const double scale = beta * eta;
  const Index k_t = obj.samples_cancel() ? 0 : schedule.k_t;
  const Index rank_units = options.prox_mode == ProxMode::kWeak
                               ? prox_cfg.target_rank
                               : std::min(x1.rows(), x1.cols());

  RunResult result{x1, {}};
  RunTrace& trace = result.trace;
  trace.f_star = options.f_star;
  trace.records.reserve(static_cast<std::size_t>(schedule.S * schedule.T));
  Matrix& x = result.x;
  std::uint64_t grads = 0;
  std::uint64_t rank1 = 0;
  const Stopwatch clock(options.timing);

  for (Index s = 1; s <= schedule.S; ++s) {
    trace.epoch_values.push_back(spec.f(x));
    Rng snap_rng = Rng::stream(seed, {static_cast<std::uint64_t>(s), 0});
    const Index k_s = schedule.k_s(s);
    if (variant == Variant::kStochastic && schedule.k_s_capped(s)) trace.snapshot_capped = true;
    const VRGradientState state = snapshot_gradient(obj, x, k_s, snap_rng);
    grads += static_cast<std::uint64_t>(state.snapshot_sample_count);

    for (Index t = 1; t <= schedule.T; ++t) {
      Rng step_rng = Rng::stream(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t)});
      const GradientEstimate est = vr_gradient(obj, state, x, k_t, step_rng);
      grads += static_cast<std::uint64_t>(est.samples_used);

      const Matrix direction = est.gradient + spec.smooth_term_gradient(x);
      Matrix v;
      try {
        const ProxQuery query(x - direction / (2.0 * scale), scale, spec.set);
        if (options.prox_mode == ProxMode::kWeak) {
          const std::uint64_t prox_seed = derive_seed(
              seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t), 1});
          v = weak_prox(query, prox_cfg, prox_seed).point;
        } else {
          v = exact_prox(query);
        }
      } catch (const ConvergenceError& e) {
        throw ConvergenceError(step_context(s, t) + e.what(), e.residual());
      } catch (const DomainError& e) {
        throw DomainError(step_context(s, t) + e.what());
      }
      rank1 += static_cast<std::uint64_t>(rank_units);
      x = (1.0 - eta) * x + eta * v;

      TraceRecord rec;
      rec.epoch = s;
      rec.inner_step = t;
      rec.f = spec.f(x);
      rec.f_mu = spec.f_mu(x);
      rec.stoch_grads = grads;
      rec.rank1_svd_equiv = rank1;
      rec.wall_seconds = clock.seconds();
      trace.records.push_back(rec);
    }
  }
  trace.epoch_values.push_back(spec.f(x));
  return result;
}

}  // namespace

ProblemSpec ProblemSpec::make(std::shared_ptr<const StochasticObjective> objective,
                              std::shared_ptr<const SmoothableTerm> smooth_term, FeasibleSet set,
                              double alpha_g) {
  if (!objective) throw DomainError("ProblemSpec: objective is required");
  const double alpha = alpha_g + (smooth_term ? smooth_term->strong_convexity() : 0.0);
  const double beta_r = smooth_term ? smooth_term->smoothness_constant() : 0.0;
  ProblemConstants constants =
      ProblemConstants::make(alpha, objective->beta_g(), beta_r, objective->sigma());
  ProblemSpec spec{std::move(objective), std::move(smooth_term), set, constants, true};
  spec.validate();
  return spec;
}

void ProblemSpec::validate() const {
  if (!objective) throw DomainError("ProblemSpec: objective is required");
  constants.validate();
  if (set.is_psd_cone() && objective->rows() != objective->cols())
    throw DimensionError("ProblemSpec: PSD cone needs a square variable");
  if (smooth_term) {
    const double expected = smooth_term->smoothness_constant();
    if (std::abs(constants.beta_r - expected) > 1e-9 * std::max(1.0, expected))
      throw DomainError("ProblemSpec: beta_r disagrees with the smoothing term");
  }
}

double ProblemSpec::f(const Matrix& x) const {
  double value = objective->value(x);
  if (smooth_term)
    value += report_nonsmooth ? smooth_term->nonsmooth_value(x) : smooth_term->smooth_value(x);
  return value;
}

double ProblemSpec::f_mu(const Matrix& x) const {
  double value = objective->value(x);
  if (smooth_term) value += smooth_term->smooth_value(x);
  return value;
}

Matrix ProblemSpec::smooth_term_gradient(const Matrix& x) const {
  if (!smooth_term) return Matrix::Zero(x.rows(), x.cols());
  return smooth_term->smooth_gradient(x);
}

Schedule derive_schedule(const ProblemSpec& spec, double epsilon, double C0) {
  Schedule s = derive_schedule(spec.constants, epsilon, C0);
  if (spec.objective->samples_cancel()) s.k_t = 0;
  return s;
}

RunResult svrgcg_run(const ProblemSpec& spec, const Schedule& schedule,
                     const WeakProxConfig& prox_cfg, const Matrix& x1, std::uint64_t seed,
                     const RunOptions& options) {
  return run_epochs(spec, schedule, prox_cfg, x1, seed, options, Variant::kStochastic);
}

RunResult finite_sum_run(const ProblemSpec& spec, const Schedule& schedule,
                         const WeakProxConfig& prox_cfg, const Matrix& x1, std::uint64_t seed,
                         const RunOptions& options) {
  return run_epochs(spec, schedule, prox_cfg, x1, seed, options, Variant::kFiniteSum);
}

SmoothedResult smoothed_solve(const ProblemSpec& spec, double epsilon,
                              const WeakProxConfig& prox_cfg, const Matrix& x1,
                              std::uint64_t seed, const SmoothedOptions& options) {
  if (!spec.smooth_term) throw DomainError("smoothed_solve: the spec has no smoothing term");
  if (!(epsilon > 0.0)) throw DomainError("smoothed_solve: epsilon must be positive");
  const SmoothableTerm& term = *spec.smooth_term;

  double mu = 0.0;
  if (options.mu) {
    mu = *options.mu;
  } else {
    SmoothingDims dims{spec.objective->rows(), spec.objective->cols(), 0};
    if (const auto* lse = dynamic_cast<const LogSumExpMax*>(&term)) dims.pieces = lse->count();
    mu = choose_mu(epsilon, term.kind(), dims);
  }

  const double alpha_g = spec.constants.alpha - term.strong_convexity();
  ProblemSpec smoothed = ProblemSpec::make(spec.objective, term.with_mu(mu), spec.set, alpha_g);
  smoothed.report_nonsmooth = true;

  const double C0 = options.C0 ? *options.C0 : smoothed.f(x1);
  Schedule schedule = derive_schedule(smoothed, epsilon, C0);
  schedule.delta = 7.0 * epsilon / (32.0 * smoothed.constants.alpha);

  WeakProxConfig cfg = prox_cfg;
  cfg.delta = schedule.delta;
  RunResult run = svrgcg_run(smoothed, schedule, cfg, x1, seed, options.run);
  return {std::move(run.x), std::move(run.trace), schedule, mu, std::move(smoothed)};
}

}  // namespace vrcg
