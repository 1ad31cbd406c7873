#include "vrcg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include "vrcg/baselines.hpp"
#include "vrcg/errors.hpp"
#include "vrcg/report.hpp"
#include "vrcg/smoothing.hpp"
#include "vrcg/solver.hpp"
#include "vrcg/stochastic.hpp"

namespace vrcg {
namespace {

const char* const kTable1Methods[] = {"low_rank_1svd", "projection", "low_rank_sparse"};
const char* const kFigureMethods[] = {"svrgcg", "scg", "scgs"};

enum Stream : std::uint64_t { kSignal = 1, kNoise = 2, kSolver = 3, kScg = 4, kScgs = 5, kSvd = 6 };

Matrix add_symmetric_noise(const Matrix& signal, double c, Rng& rng) {
  const Index n = signal.rows();
  const Matrix noise = rng.normal_matrix(n, n);
  Matrix m = signal;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double e = 0.5 * c * (noise(i, j) + noise(j, i));
      m(i, j) = signal(i, j) + e;
      m(j, i) = signal(j, i) + e;
    }
  }
  return m;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

struct RecoveryMetrics {
  double relative_error;
  double nnz_ratio;
  Index rank;
};

RecoveryMetrics recovery(const Matrix& x, const Matrix& yyt, double zero_tol) {
  const SparsityCounts xs = nnz_and_rank(x, zero_tol, 1e-6);
  const SparsityCounts ys = nnz_and_rank(yyt, zero_tol, 1e-6);
  return {(x - yyt).squaredNorm() / yyt.squaredNorm(),
          static_cast<double>(xs.nnz) / static_cast<double>(std::max<Index>(ys.nnz, 1)), xs.rank};
}

TrialRow make_row(const char* method, Index trial, const RecoveryMetrics& m) {
  TrialRow row;
  row.method = method;
  row.trial = trial;
  row.ok = true;
  row.relative_error = m.relative_error;
  row.nnz_ratio = m.nnz_ratio;
  row.rank = m.rank;
  row.reached = true;
  return row;
}

TrialRow failed_row(const char* method, Index trial, const std::string& what) {
  TrialRow row;
  row.method = method;
  row.trial = trial;
  row.ok = false;
  row.error = what;
  return row;
}

struct Table1Instance {
  Signal signal;
  Matrix m;
  FeasibleSet set;
  double zero_tol;
};

Table1Instance make_table1_instance(const ExperimentConfig& config, Index trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  Rng signal_rng = Rng::stream(config.seed, {t, kSignal});
  Rng noise_rng = Rng::stream(config.seed, {t, kNoise});
  Signal signal = generate_signal(config.d, config.r, config.nonzero_probability(), signal_rng);
  Matrix m = add_symmetric_noise(signal.yyt, config.noise_c, noise_rng);
  const FeasibleSet set = FeasibleSet::trace_psd_cone(signal.yyt.trace());
  const double zero_tol = 1e-6 * m.cwiseAbs().maxCoeff();
  return {std::move(signal), std::move(m), set, zero_tol};
}

TrialRow table1_low_rank_sparse(const ExperimentConfig& config, const Table1Instance& inst,
                                double lambda, Index trial) {
  const char* name = kTable1Methods[2];
  try {
    const Stopwatch clock(config.timing);
    const SplittingResult sol = solve_sparse_on_set(inst.m, lambda, inst.set);
    TrialRow row = make_row(name, trial, recovery(sol.sparse, inst.signal.yyt, inst.zero_tol));
    row.rank1_svd_equiv = static_cast<std::uint64_t>(sol.iterations * config.d);
    row.seconds = clock.seconds();
    if (!sol.converged) row.error = "splitting solver hit its iteration cap";
    return row;
  } catch (const std::exception& e) {
    return failed_row(name, trial, e.what());
  }
}

std::vector<TrialRow> table1_trial(const ExperimentConfig& config, Index trial) {
  std::vector<TrialRow> rows;
  std::optional<Table1Instance> made;
  try {
    made = make_table1_instance(config, trial);
  } catch (const std::exception& e) {
    for (const char* m : kTable1Methods) rows.push_back(failed_row(m, trial, e.what()));
    return rows;
  }
  const Table1Instance& inst = *made;

  try {
    const Stopwatch clock(config.timing);
    const std::uint64_t seed = derive_seed(config.seed, {static_cast<std::uint64_t>(trial), kSvd});
    const TruncatedSvd svd = truncated_svd(inst.m, 1, seed);
    TrialRow row =
        make_row(kTable1Methods[0], trial, recovery(svd.reconstruct(), inst.signal.yyt, inst.zero_tol));
    row.rank1_svd_equiv = 1;
    row.seconds = clock.seconds();
    rows.push_back(row);
  } catch (const std::exception& e) {
    rows.push_back(failed_row(kTable1Methods[0], trial, e.what()));
  }

  try {
    const Stopwatch clock(config.timing);
    const Matrix x = exact_prox(ProxQuery(inst.m, 1.0, inst.set));
    TrialRow row = make_row(kTable1Methods[1], trial, recovery(x, inst.signal.yyt, inst.zero_tol));
    row.rank1_svd_equiv = static_cast<std::uint64_t>(config.d);
    row.seconds = clock.seconds();
    rows.push_back(row);
  } catch (const std::exception& e) {
    rows.push_back(failed_row(kTable1Methods[1], trial, e.what()));
  }

  rows.push_back(table1_low_rank_sparse(config, inst, config.lambda, trial));
  return rows;
}

TrialRow figure_row(const char* method, Index trial, const RunResult& run, const Matrix& yyt,
                    double zero_tol, double epsilon, double seconds) {
  TrialRow row = make_row(method, trial, recovery(run.x, yyt, zero_tol));
  row.seconds = seconds;
  const std::optional<TraceRecord> hit = run.trace.first_within(epsilon);
  row.reached = hit.has_value();
  const TraceRecord& at = hit ? *hit : run.trace.records.back();
  row.gradients = at.stoch_grads;
  row.rank1_svd_equiv = at.rank1_svd_equiv;
  return row;
}

std::vector<TrialRow> figure_trial(const ExperimentConfig& config, Index trial) {
  std::vector<TrialRow> rows;
  const auto t = static_cast<std::uint64_t>(trial);
  try {
    Rng signal_rng = Rng::stream(config.seed, {t, kSignal});
    Rng noise_rng = Rng::stream(config.seed, {t, kNoise});
    const Index d = config.d;
    const Signal signal = generate_signal(d, config.r, config.nonzero_probability(), signal_rng);
    const Matrix m0 = signal.yyt + noise_rng.normal_matrix(d, d);
    const double epsilon = config.epsilon_rel * signal.yyt.squaredNorm();
    const double mu = config.mu_scale * epsilon / static_cast<double>(d * d);
    const FeasibleSet set = FeasibleSet::trace_psd_cone(signal.yyt.trace());
    const double zero_tol = 1e-6 * m0.cwiseAbs().maxCoeff();

    auto objective = std::make_shared<MatrixEstimationObjective>(m0, config.noise_sigma);
    auto term = std::make_shared<HuberL1>(config.lambda, mu, d, d);
    const ProblemSpec spec = ProblemSpec::make(objective, term, set, 1.0);

    const SplittingResult reference =
        solve_sparse_on_set(symmetric_part(m0), config.lambda, set, {1.0, 50000, 1e-10});
    const double f_star = spec.f(reference.feasible);

    const Matrix x1 = Matrix::Zero(d, d);
    WeakProxConfig prox_cfg;
    prox_cfg.target_rank = config.r;
    SmoothedOptions opts;
    opts.mu = mu;
    opts.run.f_star = f_star;
    opts.run.timing = config.timing;

    const Stopwatch svrg_clock(config.timing);
    const SmoothedResult svrg =
        smoothed_solve(spec, epsilon, prox_cfg, x1, derive_seed(config.seed, {t, kSolver}), opts);
    const RunResult svrg_run{svrg.x, svrg.trace};
    rows.push_back(figure_row(kFigureMethods[0], trial, svrg_run, signal.yyt, zero_tol, epsilon,
                              svrg_clock.seconds()));

    BaselineConfig base;
    base.max_outer = 10'000'000;
    base.stop_gap = epsilon;
    base.f_star = f_star;
    base.timing = config.timing;
    base.max_rank1 = static_cast<std::uint64_t>(
        std::ceil(config.baseline_budget_factor *
                  static_cast<double>(svrg.trace.records.back().rank1_svd_equiv)));
    base.scgs_inner_cap = d;

    std::vector<std::pair<const char*, RunResult>> runs;
    {
      base.method = BaselineMethod::kSCG;
      const Stopwatch clock(config.timing);
      RunResult run = scg_run(svrg.spec, base, x1, derive_seed(config.seed, {t, kScg}));
      rows.push_back(figure_row(kFigureMethods[1], trial, run, signal.yyt, zero_tol, epsilon,
                                clock.seconds()));
      runs.emplace_back(kFigureMethods[1], std::move(run));
    }
    {
      base.method = BaselineMethod::kSCGS;
      const Stopwatch clock(config.timing);
      RunResult run = scgs_run(svrg.spec, base, x1, derive_seed(config.seed, {t, kScgs}));
      rows.push_back(figure_row(kFigureMethods[2], trial, run, signal.yyt, zero_tol, epsilon,
                                clock.seconds()));
      runs.emplace_back(kFigureMethods[2], std::move(run));
    }

    if (config.write_traces && !config.out_dir.empty()) {
      const std::filesystem::path dir(config.out_dir);
      svrg.trace.write_csv((dir / ("trace_svrgcg_" + std::to_string(trial) + ".csv")).string());
      for (const auto& [name, run] : runs)
        run.trace.write_csv(
            (dir / ("trace_" + std::string(name) + "_" + std::to_string(trial) + ".csv")).string());
    }
  } catch (const std::exception& e) {
    for (const char* m : kFigureMethods) {
      const bool done = std::any_of(rows.begin(), rows.end(),
                                    [&](const TrialRow& r) { return r.method == m; });
      if (!done) rows.push_back(failed_row(m, trial, e.what()));
    }
  }
  return rows;
}

/// Runs fn(trial) for every trial on a small worker pool; results are
/// returned in trial order regardless of completion order.
template <typename Result>
std::vector<Result> for_each_trial(Index trials, unsigned threads,
                                   const std::function<Result(Index)>& fn) {
  std::vector<Result> results(static_cast<std::size_t>(trials));
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < trials; i = next++) results[static_cast<std::size_t>(i)] = fn(i);
  };
  if (workers <= 1) {
    work();
    return results;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  return results;
}

MetricsRow average(const std::string& method, const std::vector<TrialRow>& rows) {
  MetricsRow out;
  out.method = method;
  for (const TrialRow& r : rows) {
    if (r.method != method) continue;
    ++out.trials;
    if (!r.ok) continue;
    ++out.trials_ok;
    out.relative_error += r.relative_error;
    out.nnz_ratio += r.nnz_ratio;
    out.rank += static_cast<double>(r.rank);
    out.gradients += static_cast<double>(r.gradients);
    out.rank1_svd_equiv += static_cast<double>(r.rank1_svd_equiv);
    out.seconds += r.seconds;
    out.reached += r.reached ? 1.0 : 0.0;
  }
  if (out.trials_ok > 0) {
    const double n = static_cast<double>(out.trials_ok);
    for (double* v : {&out.relative_error, &out.nnz_ratio, &out.rank, &out.gradients,
                      &out.rank1_svd_equiv, &out.seconds, &out.reached})
      *v /= n;
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw DomainError("ExperimentConfig: trials must be >= 1");
  if (d < 2) throw DomainError("ExperimentConfig: d must be >= 2");
  if (r < 1 || r > d) throw DomainError("ExperimentConfig: need 1 <= r <= d");
  if (!(lambda >= 0.0)) throw DomainError("ExperimentConfig: lambda must be nonnegative");
  if (!(noise_c >= 0.0) || !(noise_sigma >= 0.0))
    throw DomainError("ExperimentConfig: noise levels must be nonnegative");
  if (!(epsilon_rel > 0.0)) throw DomainError("ExperimentConfig: epsilon_rel must be positive");
  if (!(mu_scale > 0.0)) throw DomainError("ExperimentConfig: mu_scale must be positive");
  if (!(baseline_budget_factor > 0.0))
    throw DomainError("ExperimentConfig: baseline_budget_factor must be positive");
}

double ExperimentConfig::nonzero_probability() const {
  return experiment == ExperimentKind::kTable1 ? 0.1 : 1.0 / std::sqrt(static_cast<double>(d));
}

Signal generate_signal(Index d, Index r, double nonzero_prob, Rng& rng) {
  if (d < 1 || r < 1) throw DomainError("generate_signal: empty shape");
  if (!(nonzero_prob > 0.0 && nonzero_prob <= 1.0))
    throw DomainError("generate_signal: probability must lie in (0, 1]");
  Signal out;
  out.y = Matrix::Zero(d, r);
  while (out.y.isZero(0.0)) {
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < d; ++i)
        out.y(i, j) = rng.bernoulli(nonzero_prob) ? static_cast<double>(rng.uniform_int(1, 10)) : 0.0;
  }
  out.yyt = out.y * out.y.transpose();
  out.yyt = symmetric_part(out.yyt);
  return out;
}

Matrix build_table1_instance(const Vector& y, double c, Rng& rng) {
  if (!(c >= 0.0)) throw DomainError("build_table1_instance: c must be nonnegative");
  const Matrix yyt = y * y.transpose();
  return add_symmetric_noise(symmetric_part(yyt), c, rng);
}

SparsityCounts nnz_and_rank(const Matrix& x, double zero_tol, double rank_tol) {
  if (!(zero_tol > 0.0) || !(rank_tol > 0.0))
    throw DomainError("nnz_and_rank: tolerances must be positive");
  SparsityCounts out;
  out.nnz = (x.array().abs() > zero_tol).count();
  if (x.size() == 0) return out;
  Eigen::BDCSVD<Matrix> svd(x);
  const Vector& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  out.rank = (s.array() > rank_tol * top).count();
  return out;
}

SplittingResult solve_sparse_on_set(const Matrix& m, double lambda, const FeasibleSet& set,
                                    const SplittingOptions& options) {
  if (!(lambda >= 0.0)) throw DomainError("solve_sparse_on_set: lambda must be nonnegative");
  if (!(options.rho > 0.0)) throw DomainError("solve_sparse_on_set: rho must be positive");
  require_finite(m, "solve_sparse_on_set");
  auto project = [&](const Matrix& a) { return exact_prox(ProxQuery(a, 1.0, set)); };
  auto soft = [](const Matrix& a, double k) {
    return (a.array().sign() * (a.array().abs() - k).max(0.0)).matrix();
  };

  SplittingResult out;
  double rho = options.rho;
  Matrix z = project(m);
  Matrix u = Matrix::Zero(m.rows(), m.cols());
  Matrix x = z;
  const double scale = std::max(1.0, m.norm());
  for (Index it = 1; it <= options.max_iterations; ++it) {
    x = project(z - u);
    const Matrix z_next = soft((m + rho * (x + u)) / (1.0 + rho), lambda / (1.0 + rho));
    u += x - z_next;
    const double primal = (x - z_next).norm();
    const double dual = rho * (z_next - z).norm();
    z = z_next;
    out.iterations = it;
    if (primal <= options.tolerance * scale && dual <= options.tolerance * scale) {
      out.converged = true;
      break;
    }
    if (primal > 10.0 * dual) {
      rho *= 2.0;
      u /= 2.0;
    } else if (dual > 10.0 * primal) {
      rho /= 2.0;
      u *= 2.0;
    }
  }
  out.feasible = std::move(x);
  out.sparse = std::move(z);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  const bool table1 = config.experiment == ExperimentKind::kTable1;
  const std::function<std::vector<TrialRow>(Index)> fn = [&](Index trial) {
    return table1 ? table1_trial(config, trial) : figure_trial(config, trial);
  };
  const std::vector<std::vector<TrialRow>> per_trial =
      for_each_trial<std::vector<TrialRow>>(config.trials, config.threads, fn);

  ExperimentResult result;
  for (const auto& rows : per_trial)
    result.trials.insert(result.trials.end(), rows.begin(), rows.end());
  for (const char* m : table1 ? kTable1Methods : kFigureMethods)
    result.metrics.push_back(average(m, result.trials));

  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::ostringstream metrics;
    write_metrics_csv(metrics, result.metrics);
    write_text_file((dir / "metrics.csv").string(), metrics.str());
    std::ostringstream trials;
    write_trials_csv(trials, result.trials);
    write_text_file((dir / "per_trial.csv").string(), trials.str());
  }
  return result;
}

std::vector<SweepRow> sweep_lambda(const ExperimentConfig& config,
                                   const std::vector<double>& lambdas) {
  config.validate();
  if (config.experiment != ExperimentKind::kTable1)
    throw DomainError("sweep_lambda: only the table1 experiment is supported");
  if (lambdas.empty()) throw DomainError("sweep_lambda: no lambda values");

  const std::function<std::vector<TrialRow>(Index)> fn = [&](Index trial) {
    std::vector<TrialRow> rows;
    std::optional<Table1Instance> made;
    try {
      made = make_table1_instance(config, trial);
    } catch (const std::exception& e) {
      for (std::size_t i = 0; i < lambdas.size(); ++i)
        rows.push_back(failed_row(kTable1Methods[2], trial, e.what()));
      return rows;
    }
    for (double lambda : lambdas) rows.push_back(table1_low_rank_sparse(config, *made, lambda, trial));
    return rows;
  };
  const auto per_trial = for_each_trial<std::vector<TrialRow>>(config.trials, config.threads, fn);

  std::vector<SweepRow> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    std::vector<TrialRow> column;
    for (const auto& rows : per_trial) column.push_back(rows[i]);
    out.push_back({lambdas[i], average(kTable1Methods[2], column)});
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ostringstream csv;
    write_sweep_csv(csv, out);
    write_text_file((std::filesystem::path(config.out_dir) / "sweep.csv").string(), csv.str());
  }
  return out;
}

double select_lambda(const std::vector<SweepRow>& rows, double max_nnz_ratio) {
  if (rows.empty()) throw DomainError("select_lambda: no sweep rows");
  const SweepRow* best = nullptr;
  for (const SweepRow& r : rows) {
    if (r.metrics.trials_ok == 0 || r.metrics.nnz_ratio > max_nnz_ratio) continue;
    if (!best || r.metrics.relative_error < best->metrics.relative_error) best = &r;
  }
  if (!best) {
    for (const SweepRow& r : rows) {
      if (r.metrics.trials_ok == 0) continue;
      if (!best || r.metrics.relative_error < best->metrics.relative_error) best = &r;
    }
  }
  if (!best) throw DomainError("select_lambda: every sweep row failed");
  return best->lambda;
}

}  // namespace vrcg
