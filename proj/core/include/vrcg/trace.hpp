#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vrcg {

struct TraceRecord {
  std::int64_t epoch = 0;
  std::int64_t inner_step = 0;
  /// Objective with the original nonsmooth R (when available).
  double f = 0.0;
  /// Objective with the smoothed R_mu.
  double f_mu = 0.0;
  std::uint64_t stoch_grads = 0;
  std::uint64_t rank1_svd_equiv = 0;
  double wall_seconds = 0.0;
};

/// Per-iteration log shared by the solver and the baselines.
struct RunTrace {
  std::vector<TraceRecord> records;
  /// f(X_s) at the start of each epoch, plus the final iterate (solver only).
  std::vector<double> epoch_values;
  std::optional<double> f_star;
  /// Set when some epoch's snapshot size hit the cap.
  bool snapshot_capped = false;

  /// h_s = f(X_s) - f*; empty when f* is unknown.
  std::vector<double> epoch_errors() const;

  /// First record whose f is within `gap` of f*; nullopt if none (or f* unset).
  std::optional<TraceRecord> first_within(double gap) const;

  static const char* csv_header();
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// Decimal form with 17 significant digits (round-trips every double).
std::string format_double(double x);

}  // namespace vrcg
