#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace vrcg {

/// Platform-stable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard *distributions* are not, so uniform, integer and
/// Gaussian variates are produced here directly from the raw 64-bit output
/// (53-bit mantissa fill, rejection sampling, Box-Muller).
///
/// Independent substreams are addressed by a key path, e.g.
/// `Rng::stream(seed, {epoch, step})`; the path is folded through SplitMix64
/// into the engine seed, so streams for distinct paths never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on [lo, hi) (real).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// SplitMix64 finalizer; also used to derive per-call seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for a keyed substream, without constructing it.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace vrcg
