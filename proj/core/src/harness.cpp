#include "apg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "apg/estimator.hpp"
#include "apg/rng.hpp"

namespace apg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw Error(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  const json& required(const std::string& key) {
    if (!has(key)) throw Error("missing required key '" + path(key) + "'");
    return raw(key);
  }

  double number(const std::string& key) {
    const json& v = required(key);
    if (!v.is_number()) throw Error("field '" + path(key) + "' must be a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key) {
    const json& v = required(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw Error("field '" + path(key) + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  std::uint64_t u64(const std::string& key) {
    const json& v = required(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw Error("field '" + path(key) + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const json& v = required(key);
    if (!v.is_boolean()) throw Error("field '" + path(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = required(key);
    if (!v.is_string()) throw Error("field '" + path(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = required(key);
    if (!v.is_array()) throw Error("field '" + path(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw Error("field '" + path(key) + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (!seen_.count(key)) throw Error("unknown key '" + path(key) + "'");
    }
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

TimeModel parse_time(const json& doc) {
  ObjectReader r(doc, "time");
  TimeModel tm;
  if (r.has("step_table")) {
    const json& table = r.raw("step_table");
    if (!table.is_array() || table.empty()) throw Error("field 'time.step_table' must be a non-empty array");
    for (const auto& row : table) {
      if (!row.is_array()) throw Error("field 'time.step_table' must be an array of arrays");
      std::vector<double> values;
      for (const auto& x : row) {
        if (!x.is_number()) throw Error("field 'time.step_table' must contain numbers");
        values.push_back(x.get<double>());
      }
      tm.step_table.push_back(std::move(values));
    }
    if (r.has("step_times") || r.has("n_agents")) {
      throw Error("time: give either step_table or step_times/n_agents, not both");
    }
  } else if (r.has("step_times")) {
    tm.step_times = r.numbers("step_times");
    if (r.has("n_agents")) throw Error("time: give either step_times or n_agents, not both");
  } else {
    const std::size_t n = r.has("n_agents") ? r.count("n_agents") : 1;
    const double step = r.has("step_time") ? r.number("step_time") : 1.0;
    tm.step_times.assign(n, step);
  }
  if (r.has("wrap_table")) tm.wrap_table = r.boolean("wrap_table");
  if (r.has("kappa") && r.has("kappa_per_agent")) {
    throw Error("time: give either kappa or kappa_per_agent, not both");
  }
  if (r.has("kappa")) tm.kappas = {r.number("kappa")};
  if (r.has("kappa_per_agent")) {
    tm.kappas = r.numbers("kappa_per_agent");
    const std::size_t n = tm.n_agents();
    if (tm.kappas.size() != n) {
      throw Error("field 'time.kappa_per_agent' must have one entry per agent (" + std::to_string(n) + "), got " +
                  std::to_string(tm.kappas.size()));
    }
  }
  if (r.has("mode")) {
    const std::string mode = r.text("mode");
    if (mode == "centralized") {
      tm.mode = CommMode::kCentralized;
    } else if (mode == "allreduce") {
      tm.mode = CommMode::kAllReduce;
    } else {
      throw Error("field 'time.mode' must be 'centralized' or 'allreduce'");
    }
  }
  if (r.has("jitter")) tm.jitter = r.number("jitter");
  r.finish();
  tm.validate();
  return tm;
}

json serialize_time(const TimeModel& tm) {
  json out;
  if (tm.is_table()) {
    out["step_table"] = tm.step_table;
    out["wrap_table"] = tm.wrap_table;
  } else {
    out["step_times"] = tm.step_times;
  }
  if (tm.kappas.size() == 1) {
    out["kappa"] = tm.kappas.front();
  } else {
    out["kappa_per_agent"] = tm.kappas;
  }
  out["mode"] = tm.mode == CommMode::kAllReduce ? "allreduce" : "centralized";
  out["jitter"] = tm.jitter;
  return out;
}

Schedule parse_schedule(const json& doc) {
  ObjectReader r(doc, "schedule");
  Schedule s;
  s.eta = r.number("eta");
  s.alpha = r.number("alpha");
  s.H = r.count("H");
  s.M = r.count("M");
  s.M_init = r.count("M_init");
  r.finish();
  if (!(s.eta > 0.0 && s.eta <= 1.0)) throw Error("field 'schedule.eta' must lie in (0, 1]");
  if (!(s.alpha > 0.0)) throw Error("field 'schedule.alpha' must be positive");
  if (s.H == 0 || s.M == 0 || s.M_init == 0) throw Error("schedule H, M and M_init must be at least 1");
  return s;
}

std::string join_base(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

PolicyParams zeros_like(const MdpSpec& spec) { return PolicyParams::zeros(spec); }

}  // namespace

MdpRef resolve_mdp(const json& ref, const std::string& base_dir) {
  MdpRef out;
  if (ref.is_string()) {
    out.source = ref.get<std::string>();
    if (out.source == "benchmark") {
      out.spec = benchmark_mdp();
    } else {
      const std::string path = join_base(base_dir, out.source);
      if (!fs::exists(path)) throw Error("MDP file not found: " + path);
      out.spec = load_mdp(path);
    }
    return out;
  }
  if (ref.is_object()) {
    out.spec = mdp_from_json(ref);
    return out;
  }
  throw Error("an MDP reference must be \"benchmark\", a file path or an inline object");
}

RunConfig parse_config(const json& doc, const std::string& base_dir) {
  ObjectReader r(doc, "");
  RunConfig c;
  c.method = parse_method_kind(r.text("method"));
  c.mdp = resolve_mdp(r.required("mdp"), base_dir);
  c.eps = r.number("eps");
  if (!(c.eps > 0.0)) throw Error("field 'eps' must be positive");
  if (r.has("time")) c.time = parse_time(r.raw("time"));
  else c.time = TimeModel::uniform(1, 1.0, 0.0);

  if (r.has("environments")) {
    const json& envs = r.raw("environments");
    if (!envs.is_array()) throw Error("field 'environments' must be an array of MDP references");
    for (const auto& e : envs) c.environments.push_back(resolve_mdp(e, base_dir));
    if (c.method == MethodKind::kRennalaNigt) {
      throw Error("rennala-nigt does not support heterogeneous environments; use malenia-nigt");
    }
    if (c.environments.size() != c.time.n_agents()) {
      throw Error("field 'environments' must list one MDP per agent (" + std::to_string(c.time.n_agents()) +
                  "), got " + std::to_string(c.environments.size()));
    }
    for (const auto& e : c.environments) {
      if (e.spec.n_states != c.mdp.spec.n_states || e.spec.n_actions != c.mdp.spec.n_actions) {
        throw Error("environments must match the state and action counts of 'mdp'");
      }
    }
  }

  if (r.has("schedule")) {
    const json& s = r.raw("schedule");
    if (s.is_string()) {
      if (s.get<std::string>() != "theory") throw Error("field 'schedule' must be \"theory\" or an object");
      c.schedule_source = ScheduleSource::kTheory;
    } else {
      c.schedule_source = ScheduleSource::kExplicit;
      c.schedule = parse_schedule(s);
    }
  }
  if (c.schedule_source == ScheduleSource::kExplicit) c.schedule.eps = c.eps;

  if (r.has("iterations")) c.iterations = r.count("iterations");
  if (r.has("seed")) c.seed = r.u64("seed");
  if (r.has("seeds")) c.seeds = r.count("seeds");
  if (c.seeds == 0) throw Error("field 'seeds' must be at least 1");
  if (r.has("target")) {
    ObjectReader t(r.raw("target"), "target");
    Target target;
    target.kind = parse_target_kind(t.text("kind"));
    target.value = t.number("value");
    t.finish();
    c.target = target;
  }
  if (r.has("stop_at_target")) c.stop_at_target = r.boolean("stop_at_target");
  if (r.has("time_budget")) c.time_budget = r.number("time_budget");
  if (r.has("wall_budget")) c.wall_budget = r.number("wall_budget");
  if (r.has("delta")) c.delta = r.number("delta");
  if (r.has("global")) {
    ObjectReader g(r.raw("global"), "global");
    GlobalInputs gi;
    gi.mu_F = g.number("mu_F");
    gi.eps_bias = g.number("eps_bias");
    g.finish();
    c.global = gi;
  }
  if (r.has("sync_batch")) {
    c.sync_batch = r.count("sync_batch");
    if (c.sync_batch % c.time.n_agents() != 0) {
      throw Error("field 'sync_batch' must be a multiple of the number of agents");
    }
  }
  if (r.has("theta0")) {
    c.theta0 = r.numbers("theta0");
    if (c.theta0->size() != c.mdp.spec.dim()) {
      throw Error("field 'theta0' must have n_states * n_actions = " + std::to_string(c.mdp.spec.dim()) +
                  " entries");
    }
  }
  if (r.has("trace")) c.trace = r.boolean("trace");
  if (r.has("output")) c.output = r.text("output");
  r.finish();
  return c;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, base_dir);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), fs::path(path).parent_path().string());
}

json serialize_config(const RunConfig& c) {
  const auto ref = [](const MdpRef& m) { return m.source.empty() ? mdp_to_json(m.spec) : json(m.source); };
  json out;
  out["method"] = to_string(c.method);
  out["mdp"] = ref(c.mdp);
  if (!c.environments.empty()) {
    json envs = json::array();
    for (const auto& e : c.environments) envs.push_back(ref(e));
    out["environments"] = envs;
  }
  out["time"] = serialize_time(c.time);
  if (c.schedule_source == ScheduleSource::kTheory) {
    out["schedule"] = "theory";
  } else {
    out["schedule"] = {{"eta", c.schedule.eta},
                       {"alpha", c.schedule.alpha},
                       {"H", c.schedule.H},
                       {"M", c.schedule.M},
                       {"M_init", c.schedule.M_init}};
  }
  out["eps"] = c.eps;
  if (c.iterations) out["iterations"] = *c.iterations;
  out["seed"] = c.seed;
  out["seeds"] = c.seeds;
  if (c.target) out["target"] = {{"kind", to_string(c.target->kind)}, {"value", c.target->value}};
  out["stop_at_target"] = c.stop_at_target;
  if (c.time_budget) out["time_budget"] = *c.time_budget;
  if (c.wall_budget) out["wall_budget"] = *c.wall_budget;
  if (c.delta) out["delta"] = *c.delta;
  if (c.global) out["global"] = {{"mu_F", c.global->mu_F}, {"eps_bias", c.global->eps_bias}};
  if (c.sync_batch) out["sync_batch"] = c.sync_batch;
  if (c.theta0) out["theta0"] = *c.theta0;
  out["trace"] = c.trace;
  out["output"] = c.output;
  return out;
}

RunPlan plan_run(const RunConfig& config) {
  const MdpSpec& base = config.mdp.spec;
  RunPlan plan;
  plan.theta0 = zeros_like(base);
  if (config.theta0) {
    plan.theta0.theta = Eigen::Map<const Vector>(config.theta0->data(),
                                                 static_cast<Eigen::Index>(config.theta0->size()));
  }

  MixtureObjective objective;
  double r_max = base.r_max;
  double gamma = base.gamma;
  if (config.environments.empty()) {
    objective.envs = {base};
  } else {
    for (const auto& e : config.environments) {
      objective.envs.push_back(e.spec);
      r_max = std::max(r_max, e.spec.r_max);
      gamma = std::max(gamma, e.spec.gamma);
    }
  }
  const double Delta = config.delta ? *config.delta
                                    : std::max(objective.J_star() - objective.evaluate(plan.theta0).J, 0.0);
  const SmoothnessConstants c = compute_constants(SoftmaxBounds::kMg, SoftmaxBounds::kMh, SoftmaxBounds::kL2,
                                                  r_max, gamma, 1, Delta);
  if (config.schedule_source == ScheduleSource::kTheory) {
    plan.schedule = theory_schedule(c, config.eps, &plan.constants);
  } else {
    plan.schedule = config.schedule;
    plan.schedule.eps = config.eps;
    plan.constants = at_horizon(c, plan.schedule.H);
  }
  plan.iteration_bound = iteration_bound(plan.constants, plan.schedule);
  if (config.iterations) {
    plan.iterations = *config.iterations;
  } else if (config.schedule_source == ScheduleSource::kTheory) {
    plan.iterations = static_cast<std::size_t>(std::ceil(10.0 * plan.iteration_bound));
  } else {
    plan.iterations = 1000;
  }
  return plan;
}

std::uint64_t derived_seed(std::uint64_t master, std::size_t k) {
  return stream_key(master, k, 0, StreamDomain::kSeedFanout);
}

MethodConfig method_config(const RunConfig& config, const RunPlan& plan, std::uint64_t seed) {
  MethodConfig m;
  m.kind = config.method;
  if (config.environments.empty()) {
    m.envs = {config.mdp.spec};
  } else {
    m.heterogeneous = true;
    for (const auto& e : config.environments) m.envs.push_back(e.spec);
  }
  m.time = config.time;
  m.time.jitter_seed = seed;
  m.schedule = plan.schedule;
  m.iterations = plan.iterations;
  m.seed = seed;
  m.theta0 = plan.theta0;
  m.sync_batch = config.sync_batch;
  if (config.time_budget) m.time_budget = *config.time_budget;
  if (config.wall_budget) m.wall_budget = *config.wall_budget;
  m.target = config.target.value_or(Target{TargetKind::kGradNorm, config.eps});
  m.stop_at_target = config.stop_at_target;
  m.trace = config.trace;
  return m;
}

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv("ASYNCPG_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0' || fs::path(dir).is_absolute()) return dir;
  return (fs::path(root) / dir).string();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

json band(const std::vector<double>& xs) {
  const auto f = [](double x) { return std::isfinite(x) ? json(x) : json(); };
  return {{"q20", f(quantile(xs, 0.2))}, {"median", f(quantile(xs, 0.5))}, {"q80", f(quantile(xs, 0.8))}};
}

}  // namespace

ExperimentOutput run_experiment(const RunConfig& config, unsigned threads) {
  const RunPlan plan = plan_run(config);
  ExperimentOutput out;
  out.directory = resolve_output_dir(config.output);
  fs::create_directories(out.directory);

  const std::size_t n = config.seeds;
  out.records.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t k = 0; k < n; ++k) seeds[k] = derived_seed(config.seed, k);

  const auto work = [&](std::size_t k) {
    try {
      out.records[k] = run_method(method_config(config, plan, seeds[k]));
      const fs::path base = fs::path(out.directory) / ("seed_" + std::to_string(k));
      write_file_atomic(base.string() + ".csv", to_csv(out.records[k]));
      if (config.trace) write_file_atomic(base.string() + ".trace.tsv", out.records[k].trace);
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

  json per_seed = json::array();
  std::vector<double> ttt, final_grad, best_grad, final_J, total_time;
  for (std::size_t k = 0; k < n; ++k) {
    const RunRecord& rec = out.records[k];
    out.csv_paths.push_back((fs::path(out.directory) / ("seed_" + std::to_string(k) + ".csv")).string());
    per_seed.push_back({{"index", k}, {"seed", seeds[k]}, {"csv", "seed_" + std::to_string(k) + ".csv"},
                        {"summary", to_json(rec.summary)}});
    ttt.push_back(rec.summary.time_to_target);
    final_grad.push_back(rec.rows.back().grad_norm_true);
    best_grad.push_back(rec.summary.best_grad_norm);
    final_J.push_back(rec.summary.final_J);
    total_time.push_back(rec.summary.total_time);
  }
  out.summary = {{"config", serialize_config(config)},
                 {"constants", to_json(plan.constants)},
                 {"schedule", to_json(plan.schedule)},
                 {"iteration_bound", plan.iteration_bound},
                 {"iterations", plan.iterations},
                 {"runs", per_seed},
                 {"quantiles",
                  {{"levels", {0.2, 0.5, 0.8}},
                   {"time_to_target", band(ttt)},
                   {"final_grad_norm", band(final_grad)},
                   {"best_grad_norm", band(best_grad)},
                   {"final_J", band(final_J)},
                   {"total_time", band(total_time)}}}};
  out.summary_path = (fs::path(out.directory) / "summary.json").string();
  write_file_atomic(out.summary_path, out.summary.dump(2) + "\n");
  return out;
}

json predict_report(const RunConfig& config) {
  const RunPlan plan = plan_run(config);
  const TimeModel& tm = config.time;
  std::optional<GlobalParams> global;
  if (config.global) {
    global = make_global_params(config.global->mu_F, config.global->eps_bias, plan.constants.M_g,
                                plan.constants.gamma);
  }
  json preds = json::array();
  for (PredictorKind k : all_predictor_kinds()) {
    const bool is_global = k == PredictorKind::kRennalaGlobal || k == PredictorKind::kMaleniaGlobal;
    if (is_global && !global) continue;
    preds.push_back({{"kind", to_string(k)}, {"seconds", predict_time(k, plan.constants, plan.schedule, tm, global)}});
  }
  std::vector<double> h = tm.sorted_step_times(0);
  for (double& x : h) x *= static_cast<double>(plan.schedule.H);
  json report = {{"n_agents", tm.n_agents()},
                 {"kappa", tm.kappa()},
                 {"step_times_sorted", tm.sorted_step_times(0)},
                 {"constants", to_json(plan.constants)},
                 {"schedule", to_json(plan.schedule)},
                 {"iteration_bound", plan.iteration_bound},
                 {"round_bounds",
                  {{"rennala", rennala_round_bound(h, plan.schedule.M, tm.kappa())},
                   {"malenia", malenia_round_bound(h, plan.schedule.M, tm.kappa())}}},
                 {"predictions", preds}};
  if (global) report["global"] = to_json(*global);
  return report;
}

std::string format_predict_table(const json& report) {
  std::ostringstream os;
  const auto& s = report.at("schedule");
  const auto& c = report.at("constants");
  os << "agents " << report.at("n_agents").get<std::size_t>() << ", kappa " << report.at("kappa").get<double>()
     << "\n";
  os << "L_g " << c.at("L_g").get<double>() << "  L_h " << c.at("L_h").get<double>() << "  sigma2 "
     << c.at("sigma2").get<double>() << "  Delta " << c.at("Delta").get<double>() << "\n";
  os << "eta " << s.at("eta").get<double>() << "  alpha " << s.at("alpha").get<double>() << "  H "
     << s.at("H").get<std::size_t>() << "  M " << s.at("M").get<std::size_t>() << "  M_init "
     << s.at("M_init").get<std::size_t>() << "\n";
  os << "iteration bound " << report.at("iteration_bound").get<double>() << "\n";
  os << "one-round bounds: rennala " << report.at("round_bounds").at("rennala").get<double>() << ", malenia "
     << report.at("round_bounds").at("malenia").get<double>() << "\n\n";
  os << "predictor          seconds (hidden constants = 1)\n";
  for (const auto& p : report.at("predictions")) {
    std::string name = p.at("kind").get<std::string>();
    name.resize(std::max<std::size_t>(name.size(), 18), ' ');
    os << name << ' ' << p.at("seconds").get<double>() << "\n";
  }
  return os.str();
}

json oracle_report(const MdpSpec& spec, const PolicyParams& params, std::size_t H) {
  const ExactGradientReport rep = exact_J_and_grad(spec, params, H);
  const SmoothnessConstants c = softmax_constants(spec, H, std::max(rep.J_star - rep.J, 0.0));
  const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"J", rep.J},
          {"J_H", rep.J_H},
          {"J_star", rep.J_star},
          {"grad_J", vec(rep.grad_J)},
          {"grad_norm", rep.grad_J.norm()},
          {"grad_JH", vec(rep.grad_JH)},
          {"bias_norm", rep.bias_norm},
          {"horizon", H},
          {"constants", to_json(c)}};
}

std::string format_oracle_report(const json& report) {
  std::ostringstream os;
  os.precision(10);
  os << "J = " << report.at("J").get<double>() << "\n";
  os << "J* = " << report.at("J_star").get<double>() << "\n";
  os << "||grad J|| = " << report.at("grad_norm").get<double>() << "\n";
  os << "grad J =";
  for (double x : report.at("grad_J").get<std::vector<double>>()) os << ' ' << x;
  os << "\n";
  os << "J_H (H=" << report.at("horizon").get<std::size_t>() << ") = " << report.at("J_H").get<double>() << "\n";
  os << "||grad J_H - grad J|| = " << report.at("bias_norm").get<double>() << "\n";
  const auto& c = report.at("constants");
  os << "L_g = " << c.at("L_g").get<double>() << ", L_h = " << c.at("L_h").get<double>()
     << ", sigma2 = " << c.at("sigma2").get<double>() << ", D_g = " << c.at("D_g").get<double>()
     << ", D_h = " << c.at("D_h").get<double>() << "\n";
  return os.str();
}

}  // namespace apg
