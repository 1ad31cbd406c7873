// Acceptance checks for the library and the benchmark harness. Prints one
// PASS/FAIL line per criterion. The exit status reflects crashes only unless
// --strict is given, in which case any FAIL line makes it nonzero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "test_util.hpp"
#include "vrcg/experiment.hpp"
#include "vrcg/prox.hpp"
#include "vrcg/schedule.hpp"
#include "vrcg/smoothing.hpp"
#include "vrcg/solver.hpp"

namespace {

using namespace vrcg;
using vrcg::testing::random_feasible;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Feasible sets alternate between the nuclear ball (rectangular) and the
// trace-bounded PSD cone (square).
struct RandomQuery {
  ProxQuery query;
  Index rows;
  Index cols;
};

RandomQuery random_query(Index max_dim, int k, Rng& rng) {
  const bool psd = k % 2 == 1;
  const Index rows = rng.uniform_int(2, max_dim);
  const Index cols = psd ? rows : rng.uniform_int(2, max_dim);
  const double tau = rng.uniform(0.2, 5.0);
  const FeasibleSet set = psd ? FeasibleSet::trace_psd_cone(tau) : FeasibleSet::nuclear_ball(tau);
  const double spread = rng.uniform(0.1, 4.0);
  return {ProxQuery(spread * rng.normal_matrix(rows, cols), rng.uniform(0.1, 3.0), set), rows, cols};
}

double psi(const Matrix& v, const ProxQuery& q) { return (v - q.center).squaredNorm(); }

// Keeps the r largest singular values (nuclear ball) or eigenvalues (PSD cone)
// of a feasible point; the result stays feasible.
Matrix rank_truncation(const Matrix& x, Index r, bool psd) {
  if (psd) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()));
    const Index n = x.rows();
    Matrix out = Matrix::Zero(n, n);
    for (Index i = n - 1; i >= std::max<Index>(0, n - r); --i) {
      const double ev = std::max(0.0, es.eigenvalues()(i));
      out += ev * es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    }
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index k = std::min<Index>(r, svd.singularValues().size());
  return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

Outcome oracle_equivalence() {
  Rng rng(1001);
  double worst_gap = 0.0;
  int dominated = 0;
  for (int k = 0; k < 200; ++k) {
    const RandomQuery rq = random_query(10, k, rng);
    WeakProxConfig cfg;
    cfg.target_rank = std::min(rq.rows, rq.cols);
    const Matrix exact = exact_prox(rq.query);
    const Matrix weak = weak_prox(rq.query, cfg, static_cast<std::uint64_t>(k)).point;
    worst_gap = std::max(worst_gap, (weak - exact).norm());
    const double best = psi(exact, rq.query);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      const Index atoms = rng.uniform_int(1, std::min(rq.rows, rq.cols));
      ok = best <= psi(random_feasible(rq.query.set, rq.rows, rq.cols, atoms, rng), rq.query);
    }
    dominated += ok;
  }
  return {worst_gap <= 1e-6 && dominated == 200,
          "max ||weak - exact||_F = " + fmt("%.3g", worst_gap) + ", exact prox optimal in " +
              std::to_string(dominated) + "/200 queries"};
}

Outcome weak_guarantee() {
  Rng rng(1002);
  int held = 0;
  double worst = -1e300;
  for (int k = 0; k < 200; ++k) {
    const RandomQuery rq = random_query(8, k, rng);
    const Index r = rng.uniform_int(1, std::min<Index>(3, std::min(rq.rows, rq.cols)));
    WeakProxConfig cfg;
    cfg.target_rank = r;
    const Matrix v = weak_prox(rq.query, cfg, static_cast<std::uint64_t>(k)).point;
    const double pv = psi(v, rq.query);
    std::vector<Matrix> comparators;
    comparators.push_back(rank_truncation(exact_prox(rq.query), r, rq.query.set.is_psd_cone()));
    for (int i = 0; i < 500; ++i)
      comparators.push_back(
          random_feasible(rq.query.set, rq.rows, rq.cols, rng.uniform_int(1, r), rng));
    bool ok = rq.query.set.contains(v);
    for (const Matrix& z : comparators) {
      const double slack = pv - psi(z, rq.query);
      worst = std::max(worst, slack);
      ok = ok && slack <= 1e-9;
    }
    held += ok;
  }
  return {held == 200, "guarantee held in " + std::to_string(held) +
                           "/200 queries, max psi(V) - psi(Z) = " + fmt("%.3g", worst)};
}

Outcome smoothing_gradients() {
  Rng rng(1003);
  std::vector<std::shared_ptr<const SmoothableTerm>> terms;
  terms.push_back(std::make_shared<HuberL1>(1.5, 0.3, 5, 4));
  std::vector<Matrix> a;
  for (int i = 0; i < 6; ++i) a.push_back(rng.normal_matrix(5, 4));
  terms.push_back(std::make_shared<LogSumExpMax>(a, rng.normal_vector(6), 0.7));
  terms.push_back(std::make_shared<ElasticNet>(0.8, 0.4, 0.25, 5, 4));

  double worst_rel = 0.0;
  int sandwich_failures = 0;
  for (const auto& term : terms) {
    for (int p = 0; p < 50; ++p) {
      const Matrix x = rng.uniform(0.2, 2.0) * rng.normal_matrix(5, 4);
      const Matrix g = term->smooth_gradient(x);
      for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j) {
          const double h = 1e-6;
          Matrix xp = x, xm = x;
          xp(i, j) += h;
          xm(i, j) -= h;
          const double fd = (term->smooth_value(xp) - term->smooth_value(xm)) / (2.0 * h);
          worst_rel = std::max(worst_rel, std::abs(fd - g(i, j)) / std::max(1.0, std::abs(g(i, j))));
        }
    }
    for (int p = 0; p < 1000; ++p) {
      const SandwichResult s = term->sandwich_check(rng.uniform(0.01, 5.0) * rng.normal_matrix(5, 4));
      sandwich_failures += !(s.lower_ok && s.upper_ok);
    }
  }
  return {worst_rel <= 1e-5 && sandwich_failures == 0,
          "max relative finite-difference error = " + fmt("%.3g", worst_rel) +
              ", sandwich failures = " + std::to_string(sandwich_failures) + "/3000"};
}

Outcome schedule_reproduction() {
  const Schedule s = derive_schedule(ProblemConstants::make(1.0, 1.0, 1.0, 0.0), 0.01, 1.0);
  const double alpha = 1.0, beta_g = 1.0, beta = 2.0;
  const auto T = static_cast<Index>(std::ceil(8.0 * beta / (3.0 * alpha) * std::log(8.0) + 1.0));
  const auto k_t = static_cast<Index>(std::ceil(32.0 * beta_g * beta_g / (alpha * alpha)));
  const bool ok = s.eta == 0.25 && s.k_t == 32 && s.T == 13 && s.T == T && s.k_t == k_t &&
                  s.eta == alpha / (2.0 * beta);
  return {ok, "eta = " + fmt("%g", s.eta) + ", k_t = " + std::to_string(s.k_t) +
                  ", T = " + std::to_string(s.T)};
}

Outcome finite_sum_contraction() {
  double ratio_sum = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(2000 + seed);
    const auto p = vrcg::testing::known_optimum_problem(10, 20, 2, 5.0, rng);
    const ProblemSpec spec =
        ProblemSpec::make(p.objective, nullptr, p.set, p.objective->strong_convexity());
    const Matrix x1 = Matrix::Zero(20, 20);
    const double h1 = spec.f(x1) - p.f_star;
    Schedule s = derive_schedule(spec, 1e-8 * h1, h1);
    s.S = 4;
    WeakProxConfig cfg;
    cfg.target_rank = 2;
    cfg.delta = s.delta;
    RunOptions opts;
    opts.f_star = p.f_star;
    const RunResult out = finite_sum_run(spec, s, cfg, x1, seed, opts);
    const std::vector<double> h = out.trace.epoch_errors();
    const double floor = 8.0 * spec.constants.alpha * s.delta / 7.0;
    for (std::size_t i = 0; i + 1 < h.size(); ++i) {
      ratio_sum += (h[i + 1] - floor) / (h[i] - floor);
      ++count;
    }
  }
  const double mean = ratio_sum / count;
  return {count == 120 && mean <= 5.0 / 12.0 + 0.15,
          "mean contraction over 30 seeds x 4 epochs = " + fmt("%.4g", mean) +
              " (bound " + fmt("%.4g", 5.0 / 12.0 + 0.15) + ")"};
}

const MetricsRow& metric(const std::vector<MetricsRow>& rows, const std::string& method) {
  for (const MetricsRow& r : rows)
    if (r.method == method) return r;
  throw std::runtime_error("missing method " + method);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Table1Run {
  double lambda = 0.0;
  ExperimentResult result;
  double seconds = 0.0;
};

ExperimentConfig table1_config(double c, double lambda, std::uint64_t seed, const std::string& out) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::kTable1;
  cfg.d = 50;
  cfg.noise_c = c;
  cfg.trials = 50;
  cfg.lambda = lambda;
  cfg.seed = seed;
  cfg.out_dir = out;
  return cfg;
}

// Lambda is tuned on a seed disjoint from the evaluation seed, with fewer
// trials than the evaluation to stay inside the time budget.
Table1Run tuned_table1(double c, const std::vector<double>& grid, const std::string& out) {
  ExperimentConfig tune = table1_config(c, 2.0, 8, "");
  tune.trials = 20;
  const double lambda = select_lambda(sweep_lambda(tune, grid), 2.0);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result = run_experiment(table1_config(c, lambda, 7, out));
  return {lambda, std::move(result),
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "vrcg_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

Table1Run g_high_noise;

Outcome table1_reproduction() {
  g_high_noise = tuned_table1(5.0, {6, 8, 10, 12, 15}, (work_dir() / "table1_c5_a").string());
  const auto& hi = g_high_noise.result.metrics;
  const MetricsRow& hi_lrs = metric(hi, "low_rank_sparse");
  const MetricsRow& hi_svd = metric(hi, "low_rank_1svd");

  const Table1Run low = tuned_table1(0.5, {0.5, 0.75, 1, 1.5, 2}, "");
  const auto& lo = low.result.metrics;
  const MetricsRow& lo_lrs = metric(lo, "low_rank_sparse");
  const MetricsRow& lo_svd = metric(lo, "low_rank_1svd");
  const MetricsRow& lo_proj = metric(lo, "projection");

  const bool c5_err = hi_lrs.relative_error <= 0.05;
  const bool c5_nnz = hi_lrs.nnz_ratio <= 2.0;
  const bool c5_svd = hi_svd.relative_error >= 0.7;
  const bool c05_err = lo_lrs.relative_error <= 0.005;
  const bool c05_best =
      lo_lrs.relative_error < lo_svd.relative_error && lo_lrs.relative_error < lo_proj.relative_error;
  const bool all_ok = hi_lrs.trials_ok == 50 && lo_lrs.trials_ok == 50;

  auto mark = [](bool b) { return b ? "ok" : "MISS"; };
  std::string d = "c=5 (lambda " + fmt("%g", g_high_noise.lambda) + "): LR&S err " +
                  fmt("%.4g", hi_lrs.relative_error) + " [" + mark(c5_err) + "], nnz " +
                  fmt("%.4g", hi_lrs.nnz_ratio) + " [" + mark(c5_nnz) + "], 1-SVD err " +
                  fmt("%.4g", hi_svd.relative_error) + " [" + mark(c5_svd) + "]; c=0.5 (lambda " +
                  fmt("%g", low.lambda) + "): LR&S err " + fmt("%.4g", lo_lrs.relative_error) +
                  " [" + mark(c05_err) + "], 1-SVD " + fmt("%.4g", lo_svd.relative_error) +
                  ", projection " + fmt("%.4g", lo_proj.relative_error) + " [" + mark(c05_best) + "]";
  return {c5_err && c5_nnz && c5_svd && c05_err && c05_best && all_ok, d};
}

Outcome figure_ordering() {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::kFigure;
  cfg.d = 100;
  cfg.r = 1;
  cfg.trials = 10;
  cfg.seed = 7;
  cfg.write_traces = false;
  const ExperimentResult r = run_experiment(cfg);

  int wins = 0;
  for (Index t = 0; t < cfg.trials; ++t) {
    const TrialRow *svrg = nullptr, *scg = nullptr, *scgs = nullptr;
    for (const TrialRow& row : r.trials) {
      if (row.trial != t) continue;
      if (row.method == "svrgcg") svrg = &row;
      if (row.method == "scg") scg = &row;
      if (row.method == "scgs") scgs = &row;
    }
    if (!svrg || !scg || !scgs || !svrg->ok || !svrg->reached) continue;
    auto beats = [&](const TrialRow* b) {
      if (!b->ok || !b->reached) return true;
      return svrg->rank1_svd_equiv < b->rank1_svd_equiv && svrg->gradients < b->gradients;
    };
    wins += beats(scg) && beats(scgs);
  }
  const MetricsRow& s = metric(r.metrics, "svrgcg");
  const MetricsRow& a = metric(r.metrics, "scg");
  const MetricsRow& b = metric(r.metrics, "scgs");
  return {wins >= 8, "SVRGCG strictly cheaper in " + std::to_string(wins) +
                         "/10 trials; reached target: svrgcg " + fmt("%.2g", s.reached) + ", scg " +
                         fmt("%.2g", a.reached) + ", scgs " + fmt("%.2g", b.reached)};
}

Outcome gradient_bookkeeping() {
  Rng rng(1008);
  int checked = 0, matched = 0;
  for (double eps : {1.0, 0.1, 1e-2, 1e-3, 1e-4}) {
    for (double c0 : {0.5, 3.0, 40.0}) {
      {
        auto obj = std::make_shared<MatrixEstimationObjective>(rng.normal_matrix(4, 4), 0.05);
        const ProblemSpec spec = ProblemSpec::make(obj, nullptr, FeasibleSet::nuclear_ball(2.0), 1.0);
        const Schedule s = derive_schedule(spec, eps, c0);
        WeakProxConfig cfg;
        cfg.target_rank = 1;
        const RunResult out = svrgcg_run(spec, s, cfg, Matrix::Zero(4, 4), 1);
        std::uint64_t expected = 0;
        if (!out.trace.snapshot_capped) {
          expected = static_cast<std::uint64_t>(s.k_s_base) * ((std::uint64_t{1} << s.S) - 1);
        } else {
          for (Index e = 1; e <= s.S; ++e)
            expected += static_cast<std::uint64_t>(
                std::min<double>(kSnapshotSampleCap, s.k_s_base * std::ldexp(1.0, e - 1)));
        }
        ++checked;
        matched += out.trace.records.back().stoch_grads == expected &&
                   expected == total_stochastic_gradients(s, Variant::kStochastic);
      }
      {
        auto obj = std::make_shared<FiniteSumObjective>(
            FiniteSumObjective::random(6, 3, 3, 0.5, 2.0, 1.0, rng));
        const ProblemSpec spec = ProblemSpec::make(obj, nullptr, FeasibleSet::nuclear_ball(2.0),
                                                   obj->strong_convexity());
        const Schedule s = derive_schedule(spec, eps, c0);
        WeakProxConfig cfg;
        cfg.target_rank = 1;
        const RunResult out = finite_sum_run(spec, s, cfg, Matrix::Zero(3, 3), 2);
        const auto expected = static_cast<std::uint64_t>(s.S * 6 + s.S * s.T * s.k_t);
        ++checked;
        matched += out.trace.records.back().stoch_grads == expected &&
                   expected == total_stochastic_gradients(s, Variant::kFiniteSum, 6);
      }
    }
  }
  return {matched == checked, std::to_string(matched) + "/" + std::to_string(checked) +
                                  " runs match the closed-form totals"};
}

Outcome determinism() {
  if (g_high_noise.result.metrics.empty()) return {false, "criterion 6 did not run"};
  const auto dir = work_dir();
  run_experiment(table1_config(5.0, g_high_noise.lambda, 7, (dir / "table1_c5_b").string()));
  const std::string a = slurp(dir / "table1_c5_a" / "metrics.csv");
  const std::string b = slurp(dir / "table1_c5_b" / "metrics.csv");
  return {!a.empty() && a == b, a == b ? "metrics.csv identical (" + std::to_string(a.size()) +
                                             " bytes)"
                                       : "metrics.csv differs between runs"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  bool strict = false;
  std::vector<int> only;
  std::string report_path;
  app.add_flag("--strict", strict, "Exit nonzero when any criterion fails");
  app.add_option("--only", only, "Run only these criterion numbers");
  app.add_option("--report", report_path, "Also write the result lines to this file");
  CLI11_PARSE(app, argc, argv);
  std::ofstream report;
  if (!report_path.empty()) report.open(report_path);
  auto emit = [&](const std::string& line) {
    std::cout << line << std::endl;
    if (report.is_open()) report << line << std::endl;
  };

  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 30, oracle_equivalence},
      {2, "weak-oracle guarantee", 60, weak_guarantee},
      {3, "smoothing gradients and sandwich bounds", 30, smoothing_gradients},
      {4, "schedule reproduction", 1, schedule_reproduction},
      {5, "finite-sum contraction", 120, finite_sum_contraction},
      {6, "table 1 desk-scale reproduction", 600, table1_reproduction},
      {7, "figure ordering at d=100", 900, figure_ordering},
      {8, "gradient bookkeeping equals closed form", 1, gradient_bookkeeping},
      {9, "table 1 determinism", 1200, determinism},
  };
  const std::set<int> selected(only.begin(), only.end());

  int failed = 0, crashed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
      ++crashed;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // The first of criterion 9's two runs is shared with criterion 6.
    const double charged = c.id == 9 ? secs + g_high_noise.seconds : secs;
    const bool in_time = charged <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    emit("AC" + std::to_string(c.id) + ' ' + (pass ? "PASS" : "FAIL") + "  " + c.name + "  [" +
         fmt("%.1f", charged) + " s, limit " + fmt("%g", c.limit_seconds) + " s" +
         (in_time ? "" : ", TOO SLOW") + "]  " + out.detail);
  }
  emit(std::to_string(ran - failed) + " of " + std::to_string(ran) + " criteria passed");
  if (crashed > 0) return 2;
  return strict && failed > 0 ? 1 : 0;
}
