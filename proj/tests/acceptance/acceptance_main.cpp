// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   apg_acceptance [--criterion N] [--out DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apg/aggregate.hpp"
#include "apg/constants.hpp"
#include "apg/estimator.hpp"
#include "apg/harness.hpp"
#include "apg/mdp.hpp"
#include "apg/nigt.hpp"
#include "apg/rng.hpp"
#include "apg/suites.hpp"

namespace {

using namespace apg;
namespace fs = std::filesystem;
using nlohmann::json;

// ---- pinned tolerances and budgets ----
constexpr double kStdErrors = 4.0;
constexpr double kOracleAgreement = 1e-10;
constexpr double kFiniteDiffRelTol = 1e-6;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kBiasNumericSlack = 1e-10;
constexpr double kHarmonicRelTol = 1e-12;
constexpr double kEqualTimesRatio = 1.5;
constexpr double kCommBudgetFactor = 2.0;
constexpr double kStragglerGrowth = 1e5;
constexpr double kRuntimeUnbiased = 30.0;
constexpr double kRuntimeBias = 5.0;
constexpr double kRuntimeOracle = 10.0;
constexpr double kRuntimeRoundBound = 10.0;
constexpr double kRuntimeConvergence = 60.0;
constexpr double kRuntimeFigure = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ---- 1 & 2: estimator moments on the benchmark ----

const MomentReport& benchmark_moments(double* seconds) {
  static double elapsed = 0.0;
  static const MomentReport report = [] {
    Stopwatch sw;
    const MdpSpec m = benchmark_mdp();
    MomentReport r = empirical_moments(m, PolicyParams::zeros(m), 5, 100'000, 20240601);
    elapsed = sw.seconds();
    return r;
  }();
  if (seconds) *seconds = elapsed;
  return report;
}

Outcome criterion_unbiased() {
  double secs = 0.0;
  const MomentReport& r = benchmark_moments(&secs);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.mean.size(); ++i) {
    worst = std::max(worst, std::abs(r.mean[i] - r.exact[i]) / r.std_error[i]);
  }
  const bool ok = worst <= kStdErrors && secs < kRuntimeUnbiased;
  return {ok, "max |mean - exact| / SE = " + fmt(worst) + " (limit " + fmt(kStdErrors) + "), N = 1e5, H = 5, " +
                  fmt(secs) + " s"};
}

Outcome criterion_variance() {
  // Verify M_g on a sweep before using it.
  RandomStream rng(99, 0, 0, StreamDomain::kSweep);
  double max_score = 0.0;
  for (int draw = 0; draw < 20'000; ++draw) {
    PolicyParams p = PolicyParams::zeros(2, 3);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = 4.0 * rng.normal();
    for (std::size_t a = 0; a < 3; ++a) max_score = std::max(max_score, grad_log_pi(p, draw % 2, a).norm());
  }
  const MdpSpec m = benchmark_mdp();
  const SmoothnessConstants c = softmax_constants(m, 5, 1.0);
  const double expected_sigma2 = m.r_max * m.r_max * c.M_g * c.M_g / std::pow(1.0 - m.gamma, 3.0);
  const MomentReport& r = benchmark_moments(nullptr);
  const bool ok = max_score <= c.M_g && std::abs(c.sigma2 - expected_sigma2) <= 1e-9 * expected_sigma2 &&
                  r.variance <= c.sigma2;
  return {ok, "E||g_H - grad J_H||^2 = " + fmt(r.variance) + " <= sigma^2 = " + fmt(c.sigma2) +
                  "; sweep max ||grad log pi|| = " + fmt(max_score) + " <= M_g = " + fmt(c.M_g)};
}

// ---- 3: truncation bias ----

Outcome criterion_bias() {
  Stopwatch sw;
  const MdpSpec m = benchmark_mdp();
  std::vector<PolicyParams> points{PolicyParams::zeros(m)};
  for (const auto& v : {std::vector<double>{0.3, -0.7, 1.1, 0.2}, {2.0, -1.0, -3.0, 1.5}, {-4.0, 4.0, 0.0, 5.0}}) {
    points.push_back(PolicyParams::zeros(m).with_theta(Eigen::Map<const Vector>(v.data(), 4)));
  }
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (const auto& p : points) {
    const Vector full = exact_J(m, p).grad;
    for (std::size_t H = 1; H <= 50; ++H) {
      const double bias = (exact_JH(m, p, H).grad - full).norm();
      const double bound = softmax_constants(m, H, 1.0).D_g * std::pow(m.gamma, static_cast<double>(H));
      // both sides are computed to ~1e-10; the inequality itself is strict
      if (bias > bound + kBiasNumericSlack) ++violations;
      worst_ratio = std::max(worst_ratio, bias / bound);
    }
  }
  const double secs = sw.seconds();
  return {violations == 0 && secs < kRuntimeBias,
          std::to_string(violations) + " violations over H = 1..50 at " + std::to_string(points.size()) +
              " points; max bias / bound = " + fmt(worst_ratio) + ", " + fmt(secs) + " s"};
}

// ---- 4: oracle cross-validation ----

Outcome criterion_oracles() {
  Stopwatch sw;
  const MdpSpec m = benchmark_mdp();
  std::vector<PolicyParams> points{PolicyParams::zeros(m)};
  for (const auto& v : {std::vector<double>{0.3, -0.7, 1.1, 0.2}, {-1.2, 0.4, 2.5, -0.3}}) {
    points.push_back(PolicyParams::zeros(m).with_theta(Eigen::Map<const Vector>(v.data(), 4)));
  }
  double worst_agree = 0.0;
  double worst_fd = 0.0;
  for (const auto& p : points) {
    for (std::size_t H = 1; H <= 8; ++H) {
      const EnumerationResult e = enumerate_JH(m, p, H);
      const ValueAndGradient rec = exact_JH(m, p, H);
      worst_agree = std::max(worst_agree, (e.grad_JH - rec.grad).cwiseAbs().maxCoeff());
      worst_agree = std::max(worst_agree, std::abs(e.J_H - rec.J));
      if (H > 6) continue;
      for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
        PolicyParams plus = p;
        PolicyParams minus = p;
        plus.theta[i] += kFiniteDiffStep;
        minus.theta[i] -= kFiniteDiffStep;
        const double fd = (enumerate_JH(m, plus, H).J_H - enumerate_JH(m, minus, H).J_H) / (2.0 * kFiniteDiffStep);
        const double rel = std::abs(fd - e.grad_JH[i]) / std::max(1.0, std::abs(e.grad_JH[i]));
        worst_fd = std::max(worst_fd, rel);
      }
    }
  }
  const double secs = sw.seconds();
  return {worst_agree <= kOracleAgreement && worst_fd <= kFiniteDiffRelTol && secs < kRuntimeOracle,
          "enumeration vs recursion max gap " + fmt(worst_agree) + " (limit 1e-10); finite differences rel gap " +
              fmt(worst_fd) + " (limit 1e-6); " + fmt(secs) + " s"};
}

// ---- 5 & 6: one-round time bounds ----

struct SweepConfig {
  std::vector<double> steps;
  std::size_t M = 1;
  std::size_t H = 1;
  double kappa = 0.0;
};

std::vector<SweepConfig> round_bound_sweep() {
  RandomStream rng(5150, 0, 0, StreamDomain::kSweep);
  std::vector<SweepConfig> out(1000);
  for (auto& c : out) {
    c.steps.resize(1 + rng.uniform_int(0, 7));
    for (double& x : c.steps) x = rng.uniform(0.1, 10.0);
    c.M = 1 + rng.uniform_int(0, 49);
    c.H = 1 + rng.uniform_int(0, 9);
    c.kappa = rng.uniform(0.0, 5.0);
  }
  return out;
}

std::vector<double> per_gradient_times(const SweepConfig& c) {
  std::vector<double> h = c.steps;
  for (double& x : h) x *= static_cast<double>(c.H);
  return h;
}

Outcome criterion_rennala_round_bound() {
  Stopwatch sw;
  const MdpSpec m = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(m);
  std::size_t violations = 0;
  double worst = 0.0;
  std::uint64_t seed = 0;
  for (const SweepConfig& c : round_bound_sweep()) {
    AggregationContext ctx = AggregationContext::homogeneous(m, TimeModel::from_steps(c.steps, c.kappa), seed++);
    const double elapsed = aggregate_rennala(ctx, p, c.M, c.H).elapsed;
    const std::vector<double> h = per_gradient_times(c);
    std::vector<double> sorted = h;
    std::sort(sorted.begin(), sorted.end());
    double inv = 0.0;
    double scan = INFINITY;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
      inv += 1.0 / sorted[k - 1];
      scan = std::min(scan, (static_cast<double>(c.M) + static_cast<double>(k)) / inv);
    }
    const double bound = 2.0 * c.kappa + scan;
    if (elapsed > bound) ++violations;
    worst = std::max(worst, elapsed / bound);
  }
  const double secs = sw.seconds();
  return {violations == 0 && secs < kRuntimeRoundBound, std::to_string(violations) +
                                                       " violations in 1000 configs; max elapsed / bound = " +
                                                       fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome criterion_malenia_round_bound() {
  Stopwatch sw;
  const MdpSpec m = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(m);
  std::size_t violations = 0;
  std::size_t bad_exit = 0;
  double worst = 0.0;
  std::uint64_t seed = 0;
  for (const SweepConfig& c : round_bound_sweep()) {
    AggregationContext ctx = AggregationContext::homogeneous(m, TimeModel::from_steps(c.steps, c.kappa), seed++);
    const AggregationResult r = aggregate_malenia(ctx, p, c.M, c.H);
    const std::vector<double> h = per_gradient_times(c);
    const double n = static_cast<double>(h.size());
    double mean = 0.0;
    for (double x : h) mean += x;
    mean /= n;
    const double bound = 2.0 * c.kappa + *std::max_element(h.begin(), h.end()) + mean * static_cast<double>(c.M) / n;
    if (r.elapsed > bound) ++violations;
    worst = std::max(worst, r.elapsed / bound);

    long double inv_sum = 0.0L;
    bool all_positive = true;
    for (std::size_t k : r.samples_per_agent) {
      if (k == 0) all_positive = false;
      inv_sum += 1.0L / static_cast<long double>(k);
    }
    // harmonic mean n / sum(1/M_i) >= M / n, i.e. n^2 >= M * sum(1/M_i)
    const long double lhs = static_cast<long double>(n) * static_cast<long double>(n);
    const long double rhs = static_cast<long double>(c.M) * inv_sum;
    if (!all_positive || lhs < rhs * (1.0L - kHarmonicRelTol)) ++bad_exit;
  }
  const double secs = sw.seconds();
  return {violations == 0 && bad_exit == 0 && secs < kRuntimeRoundBound,
          std::to_string(violations) + " bound violations, " + std::to_string(bad_exit) +
              " invalid exit states in 1000 configs; max elapsed / bound = " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// ---- 7: unbiasedness under asynchrony ----

double max_standardized_gap(const std::function<Vector()>& draw, std::size_t rounds, const Vector& exact) {
  Vector sum = Vector::Zero(exact.size());
  Vector sq = Vector::Zero(exact.size());
  for (std::size_t i = 0; i < rounds; ++i) {
    const Vector g = draw();
    sum += g;
    sq += g.cwiseProduct(g);
  }
  const double N = static_cast<double>(rounds);
  const Vector mean = sum / N;
  const Vector var = (sq / N - mean.cwiseProduct(mean)) * (N / (N - 1.0));
  double worst = 0.0;
  for (Eigen::Index k = 0; k < exact.size(); ++k) {
    worst = std::max(worst, std::abs(mean[k] - exact[k]) / std::sqrt(var[k] / N));
  }
  return worst;
}

Outcome criterion_async_unbiased() {
  const MdpSpec base = benchmark_mdp();
  const std::size_t H = 5;
  const std::size_t rounds = 10'000;
  PolicyParams p = PolicyParams::zeros(base);
  p.theta << 0.4, -0.3, -0.8, 0.6;

  AggregationContext ren = AggregationContext::homogeneous(base, TimeModel::from_steps({1.0, 2.0, 4.0}), 7001);
  const double ren_gap =
      max_standardized_gap([&] { return aggregate_rennala(ren, p, 4, H).gradient; }, rounds, enumerate_JH(base, p, H).grad_JH);

  const MdpSpec other = permute_states(base, {1, 0});
  AggregationContext mal =
      AggregationContext::make_heterogeneous({base, other}, TimeModel::from_steps({1.0, 3.0}), 7002);
  const Vector mix = 0.5 * (enumerate_JH(base, p, H).grad_JH + enumerate_JH(other, p, H).grad_JH);
  const double mal_gap = max_standardized_gap([&] { return aggregate_malenia(mal, p, 4, H).gradient; }, rounds, mix);

  return {ren_gap <= kStdErrors && mal_gap <= kStdErrors,
          "Rennala (h = 1, 2, 4) max gap " + fmt(ren_gap) + " SE; Malenia (2 environments) max gap " + fmt(mal_gap) +
              " SE; limit " + fmt(kStdErrors) + ", 1e4 rounds each"};
}

// ---- 8: backend equivalence ----

std::string iterate_bytes(const RunRecord& r) {
  std::string out;
  for (const Vector& v : r.iterates) {
    out.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  return out;
}

Outcome criterion_backends() {
  std::size_t mismatches = 0;
  std::size_t compared = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    MethodConfig c;
    c.envs = {benchmark_mdp()};
    c.time = TimeModel::uniform(1, 0.05, 0.0);
    c.schedule = Schedule{0.1, 0.05, 10, 6, 12, 0.05};
    c.iterations = 60;
    c.seed = seed;
    c.keep_iterates = true;
    std::vector<std::string> bytes;
    for (MethodKind kind : {MethodKind::kRennalaNigt, MethodKind::kMaleniaNigt, MethodKind::kSyncNigt}) {
      c.kind = kind;
      bytes.push_back(iterate_bytes(run_method(c)));
    }
    compared += 2;
    if (bytes[0].empty() || bytes[0] != bytes[1]) ++mismatches;
    if (bytes[0] != bytes[2]) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(compared) +
                               " pairwise comparisons of 61 iterates (n = 1, kappa = 0, 5 seeds)"};
}

// ---- 9: convergence under the theory schedule ----

Outcome criterion_convergence() {
  Stopwatch sw;
  RunConfig cfg = parse_config(R"({"method": "rennala-nigt", "mdp": "benchmark", "eps": 0.05})");
  const RunPlan plan = plan_run(cfg);
  MethodConfig m = method_config(cfg, plan, 9);
  m.target = Target{TargetKind::kGradNorm, 0.05};
  m.stop_at_target = true;
  m.wall_budget = kRuntimeConvergence;
  const RunRecord r = run_method(m);
  const double secs = sw.seconds();
  const bool reached = r.summary.reached_target && r.summary.iteration_to_target <= plan.iterations;
  return {reached && secs < kRuntimeConvergence,
          "T = " + fmt(plan.iteration_bound) + ", cap 10T = " + std::to_string(plan.iterations) + " iterations (M = " +
              std::to_string(plan.schedule.M) + ", M_init = " + std::to_string(plan.schedule.M_init) + ", H = " +
              std::to_string(plan.schedule.H) + ", alpha = " + fmt(plan.schedule.alpha) + "); ran " +
              std::to_string(r.summary.iterations) + " iterations in " + fmt(secs) + " s, stop: " +
              r.summary.stop_reason + ", best ||grad J|| = " + fmt(r.summary.best_grad_norm)};
}

// ---- 10: method ranking across timing regimes ----

double median_of(const json& summary, const std::string& regime, const std::string& method) {
  const json& v = summary.at("regimes").at(regime).at("methods").at(method).at("time_to_target").at("median");
  return v.is_null() ? INFINITY : v.get<double>();
}

Outcome criterion_figure1(const std::string& out_dir) {
  Stopwatch sw;
  SuiteOptions opt;
  opt.out_dir = out_dir;
  opt.seeds = 5;
  const json s = suite_figure1(opt);
  const double secs = sw.seconds();
  const std::vector<std::string> methods{"rennala-nigt", "sync-nigt", "greedy-nigt"};
  std::map<std::string, std::map<std::string, double>> med;
  for (const char* regime : {"equal", "heterogeneous", "comm"}) {
    for (const auto& m : methods) med[regime][m] = median_of(s, regime, m);
  }
  const auto spread = [&](const std::string& regime) {
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& m : methods) {
      lo = std::min(lo, med[regime][m]);
      hi = std::max(hi, med[regime][m]);
    }
    return hi / lo;
  };
  const bool a_ok = std::isfinite(spread("equal")) && spread("equal") <= kEqualTimesRatio;
  const double ren_b = med["heterogeneous"]["rennala-nigt"];
  const bool b_ok = std::isfinite(ren_b) && ren_b < med["heterogeneous"]["sync-nigt"] &&
                    ren_b < med["heterogeneous"]["greedy-nigt"];
  const double budget = kCommBudgetFactor * ren_b;
  const double ren_c = med["comm"]["rennala-nigt"];
  const bool c_ok = std::isfinite(ren_c) && ren_c <= budget && ren_c < med["comm"]["sync-nigt"] &&
                    ren_c < med["comm"]["greedy-nigt"] && !(med["comm"]["sync-nigt"] <= budget) &&
                    !(med["comm"]["greedy-nigt"] <= budget);
  std::ostringstream d;
  d << "(a) spread " << fmt(spread("equal")) << (a_ok ? " ok" : " FAIL");
  d << "; (b) medians R/S/G " << fmt(ren_b) << "/" << fmt(med["heterogeneous"]["sync-nigt"]) << "/"
    << fmt(med["heterogeneous"]["greedy-nigt"]) << (b_ok ? " ok" : " FAIL");
  d << "; (c) medians R/S/G " << fmt(ren_c) << "/" << fmt(med["comm"]["sync-nigt"]) << "/"
    << fmt(med["comm"]["greedy-nigt"]) << " vs budget " << fmt(budget) << (c_ok ? " ok" : " FAIL");
  d << "; equal medians R/S/G " << fmt(med["equal"]["rennala-nigt"]) << "/" << fmt(med["equal"]["sync-nigt"]) << "/"
    << fmt(med["equal"]["greedy-nigt"]) << "; " << fmt(secs) << " s";
  return {a_ok && b_ok && c_ok && secs < kRuntimeFigure, d.str()};
}

// ---- 11: straggler robustness ----

Outcome criterion_straggler() {
  const MdpSpec m = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(m);
  const std::size_t H = 5;
  const std::size_t M = 20;
  const double kappa = 1.0;
  const std::vector<double> fast{1.0, 2.0, 4.0};
  std::vector<double> all = fast;
  all.push_back(1e6);

  std::vector<double> h_fast = fast;
  for (double& x : h_fast) x *= static_cast<double>(H);
  const double bound = rennala_round_bound(h_fast, M, kappa);

  AggregationContext ren = AggregationContext::homogeneous(m, TimeModel::from_steps(all, kappa), 11);
  double worst_round = 0.0;
  for (int r = 0; r < 50; ++r) worst_round = std::max(worst_round, aggregate_rennala(ren, p, M, H).elapsed);

  AggregationContext sync_fast = AggregationContext::homogeneous(m, TimeModel::from_steps(fast, kappa), 12);
  AggregationContext sync_all = AggregationContext::homogeneous(m, TimeModel::from_steps(all, kappa), 12);
  double wave_fast = 0.0;
  double wave_all = INFINITY;
  for (int r = 0; r < 5; ++r) {
    wave_fast = std::max(wave_fast, aggregate_sync(sync_fast, p, fast.size(), H).elapsed);
    wave_all = std::min(wave_all, aggregate_sync(sync_all, p, all.size(), H).elapsed);
  }
  const double growth = wave_all / wave_fast;
  return {worst_round <= bound && growth >= kStragglerGrowth,
          "Rennala worst round " + fmt(worst_round) + " <= n-1 bound " + fmt(bound) + "; sync wave " +
              fmt(wave_fast) + " -> " + fmt(wave_all) + " (x" + fmt(growth) + ", need x" + fmt(kStragglerGrowth) +
              ")"};
}

// ---- 12: determinism ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const std::string& out_dir) {
  const std::vector<std::string> configs{
      R"({"method": "rennala-nigt", "mdp": "benchmark", "eps": 0.1,
          "time": {"step_times": [0.1, 0.3, 0.7], "kappa_per_agent": [0.5, 1, 2], "jitter": 0.2},
          "schedule": {"eta": 0.1, "alpha": 0.05, "H": 10, "M": 8, "M_init": 8},
          "iterations": 40, "seeds": 3, "seed": 42, "trace": true})",
      R"({"method": "malenia-nigt", "mdp": "benchmark", "environments": ["benchmark", "benchmark"], "eps": 0.1,
          "time": {"step_times": [0.1, 0.4], "kappa": 0.3, "mode": "allreduce"},
          "schedule": {"eta": 0.1, "alpha": 0.05, "H": 10, "M": 6, "M_init": 6},
          "iterations": 40, "seeds": 2, "seed": 43, "trace": true})",
      R"({"method": "greedy-nigt", "mdp": "benchmark", "eps": 0.1,
          "time": {"step_times": [0.1, 0.2, 0.5], "kappa": 0.2},
          "schedule": {"eta": 0.1, "alpha": 0.05, "H": 10, "M": 1, "M_init": 1},
          "iterations": 100, "seeds": 2, "seed": 44, "trace": true})",
      R"({"method": "sync-nigt", "mdp": "benchmark", "eps": 0.1,
          "time": {"step_table": [[0.1, 0.2], [0.3, 0.1]], "wrap_table": true, "kappa": 0.2},
          "schedule": {"eta": 0.1, "alpha": 0.05, "H": 10, "M": 4, "M_init": 4},
          "iterations": 40, "seeds": 2, "seed": 45, "trace": true})",
      R"({"method": "vanilla-pg", "mdp": "benchmark", "eps": 0.1,
          "time": {"n_agents": 2, "step_time": 0.1},
          "schedule": {"eta": 1, "alpha": 0.01, "H": 10, "M": 4, "M_init": 4},
          "iterations": 40, "seeds": 2, "seed": 46, "trace": true})"};
  std::size_t files = 0;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig c = parse_config(configs[i]);
    std::vector<fs::path> dirs;
    for (const char* rep : {"first", "second"}) {
      dirs.push_back(fs::path(out_dir) / "determinism" / ("config_" + std::to_string(i)) / rep);
      fs::remove_all(dirs.back());
      c.output = dirs.back().string();
      run_experiment(c, rep[0] == 'f' ? 1 : 2);
    }
    for (std::size_t k = 0; k < c.seeds; ++k) {
      for (const std::string ext : {".csv", ".trace.tsv"}) {
        const std::string name = "seed_" + std::to_string(k) + ext;
        const std::string a = slurp(dirs[0] / name);
        ++files;
        if (a.empty() || a != slurp(dirs[1] / name)) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " differing or empty files out of " + std::to_string(files) +
                               " CSV/trace pairs across 5 methods"};
}

const std::vector<std::string> kNames{
    "",
    "estimator unbiasedness",
    "variance bound",
    "truncation bias",
    "oracle cross-validation",
    "Rennala round-time bound",
    "Malenia round-time bound",
    "unbiasedness under asynchrony",
    "backend equivalence",
    "convergence (theory schedule)",
    "method ranking across timing regimes",
    "straggler robustness",
    "determinism",
};

Outcome run_criterion(int id, const std::string& out) {
  switch (id) {
    case 1: return criterion_unbiased();
    case 2: return criterion_variance();
    case 3: return criterion_bias();
    case 4: return criterion_oracles();
    case 5: return criterion_rennala_round_bound();
    case 6: return criterion_malenia_round_bound();
    case 7: return criterion_async_unbiased();
    case 8: return criterion_backends();
    case 9: return criterion_convergence();
    case 10: return criterion_figure1(out);
    case 11: return criterion_straggler();
    case 12: return criterion_determinism(out);
    default: throw Error("criterion must be 1..12");
  }
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string out = "acceptance_out";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      out = argv[++i];
    } else {
      std::cerr << "usage: apg_acceptance [--criterion N] [--out DIR]\n";
      return 2;
    }
  }
  std::vector<int> ids;
  if (only) {
    ids.push_back(only);
  } else {
    for (int i = 1; i <= 12; ++i) ids.push_back(i);
  }
  int failures = 0;
  for (int id : ids) {
    Outcome o;
    try {
      o = run_criterion(id, out);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << " [" << kNames.at(static_cast<std::size_t>(id)) << "]: "
              << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
