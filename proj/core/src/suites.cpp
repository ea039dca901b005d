#include "apg/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "apg/aggregate.hpp"
#include "apg/constants.hpp"
#include "apg/harness.hpp"
#include "apg/nigt.hpp"

namespace apg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

std::vector<std::uint64_t> seed_list(const SuiteOptions& opt) {
  std::vector<std::uint64_t> out(opt.seeds);
  for (std::size_t k = 0; k < opt.seeds; ++k) out[k] = derived_seed(opt.master_seed, k);
  return out;
}

/// Runs `base` once per seed, spreading seeds over worker threads.
std::vector<RunRecord> run_seeds(const MethodConfig& base, const std::vector<std::uint64_t>& seeds,
                                 unsigned threads) {
  const std::size_t n = seeds.size();
  std::vector<RunRecord> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto work = [&](std::size_t k) {
    try {
      MethodConfig c = base;
      c.seed = seeds[k];
      c.time.jitter_seed = seeds[k];
      out[k] = run_method(c);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) work(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Band {
  double q20 = kInf;
  double median = kInf;
  double q80 = kInf;
};

Band time_band(const std::vector<RunRecord>& records) {
  std::vector<double> t;
  for (const auto& r : records) t.push_back(r.summary.time_to_target);
  return {quantile(t, 0.2), quantile(t, 0.5), quantile(t, 0.8)};
}

json band_json(const Band& b) {
  return {{"q20", finite_or_null(b.q20)}, {"median", finite_or_null(b.median)}, {"q80", finite_or_null(b.q80)}};
}

void write_records(const fs::path& dir, const std::vector<RunRecord>& records, const json& summary) {
  for (std::size_t k = 0; k < records.size(); ++k) {
    write_file_atomic((dir / ("seed_" + std::to_string(k) + ".csv")).string(), to_csv(records[k]));
  }
  write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
}

json run_summaries(const std::vector<RunRecord>& records, const std::vector<std::uint64_t>& seeds) {
  json runs = json::array();
  for (std::size_t k = 0; k < records.size(); ++k) {
    runs.push_back({{"index", k}, {"seed", seeds[k]}, {"csv", "seed_" + std::to_string(k) + ".csv"},
                    {"summary", to_json(records[k].summary)}});
  }
  return runs;
}

// ---- figure 1 ----------------------------------------------------------

constexpr std::size_t kFigureAgents = 10;
constexpr std::size_t kFigureHorizon = 20;
constexpr double kFigureEta = 0.1;
constexpr double kFigureTarget = 0.05;   // relative J gap
constexpr double kFigureBudget = 4000.0;  // virtual seconds per run
constexpr double kParamCount = 4.0;       // d of the benchmark policy

struct Regime {
  std::string name;
  std::string label;
  TimeModel time;
};

/// Per-gradient times h_i and per-agent kappa_i; step times are h_i / H.
std::vector<Regime> figure_regimes() {
  const auto build = [](auto h_of, auto kappa_of) {
    TimeModel tm;
    tm.step_times.resize(kFigureAgents);
    tm.kappas.resize(kFigureAgents);
    for (std::size_t i = 0; i < kFigureAgents; ++i) {
      const double idx = static_cast<double>(i + 1);
      tm.step_times[i] = h_of(idx) / static_cast<double>(kFigureHorizon);
      tm.kappas[i] = kappa_of(idx);
    }
    return tm;
  };
  const double comm_scale = std::pow(kParamCount, 0.25);
  return {
      {"equal", "h_i = 1, kappa_i = 0", build([](double) { return 1.0; }, [](double) { return 0.0; })},
      {"heterogeneous", "h_i = sqrt(i), kappa_i = sqrt(i)",
       build([](double i) { return std::sqrt(i); }, [](double i) { return std::sqrt(i); })},
      {"comm", "h_i = sqrt(i), kappa_i = sqrt(i) * d^(1/4)",
       build([](double i) { return std::sqrt(i); }, [=](double i) { return std::sqrt(i) * comm_scale; })},
  };
}

struct Candidate {
  double alpha = 0.0;
  std::size_t M = 1;
};

std::vector<Candidate> figure_grid(MethodKind kind, bool quick) {
  std::vector<double> alphas;
  for (int k = quick ? -6 : -10; k <= -1; k += quick ? 2 : 1) alphas.push_back(std::ldexp(1.0, k));
  std::vector<std::size_t> batches;
  switch (kind) {
    case MethodKind::kRennalaNigt:
      batches = quick ? std::vector<std::size_t>{20} : std::vector<std::size_t>{20, 30, 50};
      break;
    case MethodKind::kSyncNigt:
      batches = {kFigureAgents};  // one gradient per agent per step
      break;
    default:
      batches = {1};
  }
  std::vector<Candidate> out;
  for (std::size_t M : batches) {
    for (double a : alphas) out.push_back({a, M});
  }
  return out;
}

MethodConfig figure_config(MethodKind kind, const TimeModel& tm, const Candidate& cand) {
  MethodConfig c;
  c.kind = kind;
  c.envs = {benchmark_mdp()};
  c.time = tm;
  c.schedule = Schedule{kFigureEta, cand.alpha, kFigureHorizon, cand.M, cand.M, kFigureTarget};
  c.iterations = std::numeric_limits<std::size_t>::max();
  c.time_budget = kFigureBudget;
  c.target = Target{TargetKind::kJGap, kFigureTarget};
  c.stop_at_target = true;
  if (kind == MethodKind::kSyncNigt) c.sync_batch = kFigureAgents;
  return c;
}

bool better(const Band& a, const Band& b) {
  if (a.median != b.median) return a.median < b.median;
  return a.q80 < b.q80;
}

}  // namespace

json suite_figure1(const SuiteOptions& opt) {
  const fs::path root = fs::path(resolve_output_dir(opt.out_dir)) / "figure1";
  const std::vector<std::uint64_t> seeds = seed_list(opt);
  const std::vector<MethodKind> methods{MethodKind::kRennalaNigt, MethodKind::kSyncNigt, MethodKind::kGreedyNigt};

  json regimes = json::object();
  for (const Regime& regime : figure_regimes()) {
    json per_method = json::object();
    for (MethodKind kind : methods) {
      json grid = json::array();
      Band best_band;
      Candidate best{};
      std::vector<RunRecord> best_records;
      for (const Candidate& cand : figure_grid(kind, opt.quick)) {
        std::vector<RunRecord> recs = run_seeds(figure_config(kind, regime.time, cand), seeds, opt.threads);
        const Band b = time_band(recs);
        grid.push_back({{"alpha", cand.alpha}, {"M", cand.M}, {"time_to_target", band_json(b)}});
        if (best_records.empty() || better(b, best_band)) {
          best_band = b;
          best = cand;
          best_records = std::move(recs);
        }
      }
      std::vector<double> times;
      for (const auto& r : best_records) times.push_back(r.summary.time_to_target);
      json times_json = json::array();
      for (double t : times) times_json.push_back(finite_or_null(t));
      json entry = {{"method", to_string(kind)},
                    {"alpha", best.alpha},
                    {"M", best.M},
                    {"M_init", best.M},
                    {"eta", kFigureEta},
                    {"time_to_target", band_json(best_band)},
                    {"times", times_json},
                    {"grid", grid}};
      json method_summary = entry;
      method_summary["regime"] = regime.name;
      method_summary["runs"] = run_summaries(best_records, seeds);
      write_records(root / regime.name / to_string(kind), best_records, method_summary);
      per_method[to_string(kind)] = entry;
    }
    regimes[regime.name] = {{"time_model", regime.label}, {"methods", per_method}};
  }

  json summary = {
      {"suite", "figure1"},
      {"mdp", "benchmark"},
      {"n_agents", kFigureAgents},
      {"seeds", seeds},
      {"protocol",
       {{"theta0", "zeros"},
        {"horizon", kFigureHorizon},
        {"eta", kFigureEta},
        {"alpha_grid", opt.quick ? "2^-6, 2^-4, 2^-2" : "2^-10 .. 2^-1"},
        {"rennala_M_grid", opt.quick ? json({20}) : json({20, 30, 50})},
        {"sync_batch", kFigureAgents},
        {"greedy_batch", 1},
        {"target", {{"kind", "J_gap"}, {"value", kFigureTarget}}},
        {"time_to_target", "first logged iterate with (J* - J) / (J* - J(theta_0)) <= target"},
        {"time_budget", kFigureBudget},
        {"selection", "per regime and method, the grid point with the least median time-to-target (ties: least q80)"}}},
      {"regimes", regimes}};
  write_file_atomic((root / "summary.json").string(), summary.dump(2) + "\n");
  return summary;
}

namespace {

constexpr std::size_t kHeteroHorizon = 20;
constexpr double kHeteroBudget = 3000.0;

}  // namespace

json suite_heterogeneous(const SuiteOptions& opt) {
  const fs::path root = fs::path(resolve_output_dir(opt.out_dir)) / "heterogeneous";
  const std::vector<std::uint64_t> seeds = seed_list(opt);
  const MdpSpec base = benchmark_mdp();
  const std::vector<MdpSpec> envs{base, permute_states(base, {1, 0})};
  const TimeModel tm = TimeModel::from_steps({1.0 / kHeteroHorizon, 10.0 / kHeteroHorizon});
  const MixtureObjective mixture{envs};

  json methods = json::object();
  for (MethodKind kind : {MethodKind::kMaleniaNigt, MethodKind::kGreedyNigt}) {
    const std::vector<std::size_t> batches =
        kind == MethodKind::kMaleniaNigt ? std::vector<std::size_t>{20, 30, 50} : std::vector<std::size_t>{1};
    std::vector<RunRecord> best_records;
    double best_score = -kInf;
    Candidate best{};
    json grid = json::array();
    for (std::size_t M : batches) {
      for (int k = opt.quick ? -6 : -10; k <= -1; k += opt.quick ? 2 : 1) {
        MethodConfig c;
        c.kind = kind;
        c.envs = envs;
        c.heterogeneous = true;
        c.time = tm;
        c.schedule = Schedule{kFigureEta, std::ldexp(1.0, k), kHeteroHorizon, M, M, kFigureTarget};
        c.iterations = std::numeric_limits<std::size_t>::max();
        c.time_budget = kHeteroBudget;
        std::vector<RunRecord> recs = run_seeds(c, seeds, opt.threads);
        std::vector<double> finals;
        for (const auto& r : recs) finals.push_back(r.summary.final_J);
        const double score = quantile(finals, 0.5);
        grid.push_back({{"alpha", c.schedule.alpha}, {"M", M}, {"median_final_J", score}});
        if (score > best_score) {
          best_score = score;
          best = {c.schedule.alpha, M};
          best_records = std::move(recs);
        }
      }
    }
    json entry = {{"method", to_string(kind)}, {"alpha", best.alpha}, {"M", best.M},
                  {"median_final_J", best_score}, {"grid", grid}};
    json method_summary = entry;
    method_summary["runs"] = run_summaries(best_records, seeds);
    write_records(root / to_string(kind), best_records, method_summary);
    methods[to_string(kind)] = entry;
  }
  json summary = {{"suite", "heterogeneous"},
                  {"environments", {"benchmark", "benchmark with states 0 and 1 swapped"}},
                  {"time_model", "h = (1, 10), kappa = 0"},
                  {"mixture_J_star_upper", mixture.J_star()},
                  {"mixture_J_initial", mixture.evaluate(PolicyParams::zeros(base)).J},
                  {"time_budget", kHeteroBudget},
                  {"selection", "grid point with the largest median final mixture J"},
                  {"seeds", seeds},
                  {"methods", methods}};
  write_file_atomic((root / "summary.json").string(), summary.dump(2) + "\n");
  return summary;
}

json suite_scaling(const SuiteOptions& opt) {
  const fs::path root = fs::path(resolve_output_dir(opt.out_dir)) / "scaling";
  const std::vector<std::size_t> agent_counts =
      opt.quick ? std::vector<std::size_t>{1, 2, 4} : std::vector<std::size_t>{1, 2, 4, 8, 16, 32};
  const std::size_t rounds = opt.quick ? 20 : 200;
  const std::size_t H = 10;
  const std::size_t M = 20;
  const double kappa = 1.0;
  const MdpSpec spec = benchmark_mdp();
  const PolicyParams theta = PolicyParams::zeros(spec);

  const SmoothnessConstants c = softmax_constants(spec, H, exact_delta(spec, theta));
  const Schedule sched{0.5, 0.01, H, M, M, 0.5};

  std::string csv =
      "n_agents,M,H,kappa,rennala_round_mean,rennala_round_max,rennala_bound,malenia_round_mean,"
      "malenia_round_max,malenia_bound,sync_wave_mean,predict_rennala_total,predict_malenia_total\n";
  json rows = json::array();
  for (std::size_t n : agent_counts) {
    std::vector<double> steps(n);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = std::sqrt(static_cast<double>(i + 1));
      steps[i] = h[i] / static_cast<double>(H);
    }
    const TimeModel tm = TimeModel::from_steps(steps, kappa);
    const auto measure = [&](auto aggregate, std::size_t batch) {
      AggregationContext ctx = AggregationContext::homogeneous(spec, tm, opt.master_seed);
      ctx.timing_only = true;
      double sum = 0.0;
      double worst = 0.0;
      for (std::size_t r = 0; r < rounds; ++r) {
        const double e = aggregate(ctx, theta, batch, H).elapsed;
        sum += e;
        worst = std::max(worst, e);
      }
      return std::pair{sum / static_cast<double>(rounds), worst};
    };
    const auto [ren_mean, ren_max] = measure(aggregate_rennala, M);
    const auto [mal_mean, mal_max] = measure(aggregate_malenia, M);
    const auto [sync_mean, sync_max] = measure(aggregate_sync, n);
    (void)sync_max;
    const double ren_bound = rennala_round_bound(h, M, kappa);
    const double mal_bound = malenia_round_bound(h, M, kappa);
    const double pred_ren = predict_time(PredictorKind::kRennalaTotal, c, sched, tm);
    const double pred_mal = predict_time(PredictorKind::kMaleniaTotal, c, sched, tm);
    const std::vector<double> values{ren_mean, ren_max,  ren_bound, mal_mean, mal_max,
                                     mal_bound, sync_mean, pred_ren,  pred_mal};
    csv += std::to_string(n) + "," + std::to_string(M) + "," + std::to_string(H) + "," + format_double(kappa);
    for (double v : values) csv += "," + format_double(v);
    csv += "\n";
    rows.push_back({{"n_agents", n},
                    {"rennala_round_mean", ren_mean},
                    {"rennala_round_max", ren_max},
                    {"rennala_bound", ren_bound},
                    {"malenia_round_mean", mal_mean},
                    {"malenia_round_max", mal_max},
                    {"malenia_bound", mal_bound},
                    {"sync_wave_mean", sync_mean},
                    {"predict_rennala_total", pred_ren},
                    {"predict_malenia_total", pred_mal}});
  }
  write_file_atomic((root / "scaling.csv").string(), csv);
  json summary = {{"suite", "scaling"},
                  {"time_model", "h_i = sqrt(i) per gradient, kappa = 1"},
                  {"M", M},
                  {"H", H},
                  {"rounds", rounds},
                  {"rows", rows}};
  write_file_atomic((root / "summary.json").string(), summary.dump(2) + "\n");
  return summary;
}

}  // namespace apg
