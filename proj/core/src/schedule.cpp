#include "vrcg/schedule.hpp"

#include <cmath>
#include <string>

#include "vrcg/errors.hpp"

namespace vrcg {
namespace {

Index ceil_count(double x, const char* what) {
  if (!std::isfinite(x) || x > 9.0e18)
    throw DomainError(std::string("derive_schedule: ") + what + " is not representable");
  return static_cast<Index>(std::ceil(x));
}

}  // namespace

ProblemConstants ProblemConstants::make(double alpha, double beta_g, double beta_r, double sigma) {
  ProblemConstants c{alpha, beta_g, beta_r, beta_g + beta_r, sigma};
  c.validate();
  return c;
}

void ProblemConstants::validate() const {
  for (double v : {alpha, beta_g, beta_r, beta, sigma})
    if (!std::isfinite(v) || v < 0.0) throw DomainError("ProblemConstants: entries must be finite and nonnegative");
  if (!(alpha > 0.0)) throw DomainError("ProblemConstants: alpha must be positive");
  if (std::abs(beta - (beta_g + beta_r)) > 1e-12 * std::max(1.0, beta))
    throw DomainError("ProblemConstants: beta must equal beta_g + beta_r");
  if (alpha > beta * (1.0 + 1e-12))
    throw DomainError("ProblemConstants: alpha exceeds beta (condition number below 1)");
}

Index Schedule::k_s(Index s) const {
  if (s < 1) throw DomainError("Schedule::k_s: epochs start at 1");
  if (k_s_base == 0) return 0;
  if (k_s_capped(s)) return kSnapshotSampleCap;
  return k_s_base << (s - 1);
}

bool Schedule::k_s_capped(Index s) const {
  if (s < 1) throw DomainError("Schedule::k_s_capped: epochs start at 1");
  if (k_s_base == 0) return false;
  if (s - 1 >= 40) return true;
  return k_s_base > (kSnapshotSampleCap >> (s - 1));
}

Schedule derive_schedule(const ProblemConstants& constants, double epsilon, double C0) {
  constants.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw DomainError("derive_schedule: epsilon must be positive");
  if (!(C0 > 0.0) || !std::isfinite(C0)) throw DomainError("derive_schedule: C0 must be positive");

  const double a = constants.alpha;
  const double b = constants.beta;
  Schedule s;
  s.T = ceil_count(8.0 * b / (3.0 * a) * std::log(8.0) + 1.0, "T");
  s.eta = a / (2.0 * b);
  s.k_t = ceil_count(32.0 * constants.beta_g * constants.beta_g / (a * a), "k_t");
  s.k_s_base = ceil_count(32.0 * constants.sigma * constants.sigma / (a * C0), "k_s");
  s.S = std::max<Index>(1, ceil_count(std::log2(C0 / epsilon), "S") + 2);
  s.delta = 7.0 * epsilon / (16.0 * a);
  s.C0 = C0;
  s.alpha = a;
  s.epsilon = epsilon;
  return s;
}

double predicted_error(const Schedule& schedule, Index s, Variant variant) {
  if (s < 1) throw DomainError("predicted_error: epochs start at 1");
  const double rate = variant == Variant::kStochastic ? 0.5 : 5.0 / 12.0;
  return schedule.C0 * std::pow(rate, static_cast<double>(s - 1)) +
         8.0 * schedule.alpha * schedule.delta / 7.0;
}

std::uint64_t total_stochastic_gradients(const Schedule& schedule, Variant variant,
                                         Index finite_sum_n) {
  const auto S = static_cast<std::uint64_t>(schedule.S);
  const std::uint64_t inner = S * static_cast<std::uint64_t>(schedule.T) *
                              static_cast<std::uint64_t>(schedule.k_t);
  if (variant == Variant::kFiniteSum) {
    if (finite_sum_n < 1) throw DomainError("total_stochastic_gradients: need n >= 1");
    return inner + S * static_cast<std::uint64_t>(finite_sum_n);
  }
  if (!schedule.k_s_capped(schedule.S))
    return inner + static_cast<std::uint64_t>(schedule.k_s_base) * ((std::uint64_t{1} << S) - 1);
  std::uint64_t snapshots = 0;
  for (Index s = 1; s <= schedule.S; ++s) snapshots += static_cast<std::uint64_t>(schedule.k_s(s));
  return inner + snapshots;
}

}  // namespace vrcg
