#include "apg/nigt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "apg/rng.hpp"

namespace apg {

OptimizerState OptimizerState::start(const PolicyParams& theta0) {
  OptimizerState s;
  s.theta_prev = theta0;
  s.theta_curr = theta0;
  s.d = Vector::Zero(theta0.theta.size());
  s.t = 0;
  return s;
}

PolicyParams nigt_extrapolate(const OptimizerState& state, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("eta must lie in (0, 1]");
  const double coef = (1.0 - eta) / eta;
  return state.theta_curr.with_theta(state.theta_curr.theta +
                                     coef * (state.theta_curr.theta - state.theta_prev.theta));
}

OptimizerState nigt_update(const OptimizerState& state, const Vector& g, double eta, double alpha) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("eta must lie in (0, 1]");
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
  if (g.size() != state.d.size()) throw Error("gradient dimension mismatch");
  if (!g.allFinite()) throw Error("non-finite gradient");
  OptimizerState next;
  next.d = (1.0 - eta) * state.d + eta * g;
  next.theta_prev = state.theta_curr;
  const double norm = next.d.norm();
  next.theta_curr = norm > 0.0 ? state.theta_curr.with_theta(state.theta_curr.theta + (alpha / norm) * next.d)
                               : state.theta_curr;
  next.t = state.t + 1;
  return next;
}

namespace {

struct NamedMethod {
  MethodKind kind;
  const char* name;
};

constexpr NamedMethod kMethods[] = {
    {MethodKind::kRennalaNigt, "rennala-nigt"}, {MethodKind::kMaleniaNigt, "malenia-nigt"},
    {MethodKind::kSyncNigt, "sync-nigt"},       {MethodKind::kGreedyNigt, "greedy-nigt"},
    {MethodKind::kVanillaPg, "vanilla-pg"},
};

}  // namespace

std::string to_string(MethodKind kind) {
  for (const auto& m : kMethods) {
    if (m.kind == kind) return m.name;
  }
  return "unknown";
}

MethodKind parse_method_kind(const std::string& name) {
  for (const auto& m : kMethods) {
    if (name == m.name) return m.kind;
  }
  throw Error("unknown method '" + name +
              "' (expected rennala-nigt, malenia-nigt, sync-nigt, greedy-nigt or vanilla-pg)");
}

std::string to_string(TargetKind kind) { return kind == TargetKind::kGradNorm ? "grad_norm" : "J_gap"; }

TargetKind parse_target_kind(const std::string& name) {
  if (name == "grad_norm") return TargetKind::kGradNorm;
  if (name == "J_gap") return TargetKind::kJGap;
  throw Error("unknown target kind '" + name + "' (expected grad_norm or J_gap)");
}

double MixtureObjective::J_star() const {
  double total = 0.0;
  for (const auto& e : envs) total += optimal_value(e);
  return total / static_cast<double>(envs.size());
}

ValueAndGradient MixtureObjective::evaluate(const PolicyParams& params) const {
  ValueAndGradient out = exact_J(envs.front(), params);
  for (std::size_t i = 1; i < envs.size(); ++i) {
    const ValueAndGradient vg = exact_J(envs[i], params);
    out.J += vg.J;
    out.grad += vg.grad;
  }
  const double n = static_cast<double>(envs.size());
  out.J /= n;
  out.grad /= n;
  return out;
}

namespace {

std::size_t round_up(std::size_t x, std::size_t n) { return ((x + n - 1) / n) * n; }

class Runner {
 public:
  explicit Runner(const MethodConfig& cfg) : cfg_(cfg), ctx_(make_context(cfg)) {
    objective_.envs = cfg.heterogeneous ? cfg.envs : std::vector<MdpSpec>{cfg.envs.front()};
    ctx_.sim.enable_trace(cfg.trace);
    J_star_ = objective_.J_star();
    wall_start_ = std::chrono::steady_clock::now();
  }

  RunRecord run() {
    const PolicyParams theta0 =
        cfg_.theta0 ? *cfg_.theta0 : PolicyParams::zeros(ctx_.envs.front().n_states, ctx_.envs.front().n_actions);
    if (theta0.dim() != ctx_.dim()) throw Error("theta0 dimension does not match the environment");
    state_ = OptimizerState::start(theta0);
    log_row();
    if (!should_stop()) {
      switch (cfg_.kind) {
        case MethodKind::kGreedyNigt:
          run_greedy();
          break;
        case MethodKind::kVanillaPg:
          run_vanilla();
          break;
        default:
          run_batched();
      }
    }
    finish_summary();
    if (cfg_.trace) record_.trace = ctx_.sim.trace();
    return std::move(record_);
  }

 private:
  static AggregationContext make_context(const MethodConfig& cfg) {
    if (cfg.envs.empty()) throw Error("run needs at least one environment");
    cfg.time.validate();
    if (cfg.heterogeneous) {
      if (cfg.kind == MethodKind::kRennalaNigt) {
        throw Error("rennala-nigt requires a homogeneous setup; use malenia-nigt for heterogeneous environments");
      }
      return AggregationContext::make_heterogeneous(cfg.envs, cfg.time, cfg.seed);
    }
    if (cfg.envs.size() != 1) throw Error("homogeneous run expects exactly one environment");
    return AggregationContext::homogeneous(cfg.envs.front(), cfg.time, cfg.seed);
  }

  const Schedule& sched() const { return cfg_.schedule; }

  double logged_eta() const { return cfg_.kind == MethodKind::kVanillaPg ? 1.0 : sched().eta; }

  void log_row() {
    const ValueAndGradient vg = objective_.evaluate(state_.theta_curr);
    RunRow row;
    row.iteration = state_.t;
    row.virtual_time = ctx_.sim.now();
    row.grad_norm_true = vg.grad.norm();
    row.J_true = vg.J;
    row.samples_cum = ctx_.samples;
    row.comms_cum = ctx_.comms;
    row.eta = logged_eta();
    row.alpha = sched().alpha;
    record_.rows.push_back(row);
    if (cfg_.keep_iterates) record_.iterates.push_back(state_.theta_curr.theta);
    if (cfg_.target && !record_.summary.reached_target && target_met(row)) {
      record_.summary.reached_target = true;
      record_.summary.time_to_target = row.virtual_time;
      record_.summary.iteration_to_target = row.iteration;
    }
  }

  bool target_met(const RunRow& row) const {
    if (cfg_.target->kind == TargetKind::kGradNorm) return row.grad_norm_true <= cfg_.target->value;
    const double J0 = record_.rows.front().J_true;
    const double scale = J_star_ - J0;
    if (!(scale > 0.0)) return true;
    return (J_star_ - row.J_true) / scale <= cfg_.target->value;
  }

  bool should_stop() {
    auto& reason = record_.summary.stop_reason;
    if (cfg_.stop_at_target && record_.summary.reached_target) {
      reason = "target";
    } else if (state_.t >= cfg_.iterations) {
      reason = "iterations";
    } else if (ctx_.sim.now() >= cfg_.time_budget) {
      reason = "time_budget";
    } else if (std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count() >=
               cfg_.wall_budget) {
      reason = "wall_budget";
    }
    return !reason.empty();
  }

  AggregationResult aggregate(const PolicyParams& at, std::size_t batch) {
    switch (cfg_.kind) {
      case MethodKind::kRennalaNigt:
        return aggregate_rennala(ctx_, at, batch, sched().H);
      case MethodKind::kMaleniaNigt:
        return aggregate_malenia(ctx_, at, batch, sched().H);
      default:
        return aggregate_sync(ctx_, at, round_up(batch, ctx_.n_agents()), sched().H);
    }
  }

  void run_batched() {
    const std::size_t M = cfg_.sync_batch && cfg_.kind == MethodKind::kSyncNigt ? cfg_.sync_batch : sched().M;
    AggregationResult init = aggregate(state_.theta_curr, sched().M_init);
    state_ = nigt_update(state_, init.gradient, 1.0, sched().alpha);
    log_row();
    while (!should_stop()) {
      const PolicyParams ahead = nigt_extrapolate(state_, sched().eta);
      const AggregationResult res = aggregate(ahead, M);
      state_ = nigt_update(state_, res.gradient, sched().eta, sched().alpha);
      log_row();
    }
  }

  void run_vanilla() {
    const std::size_t n = ctx_.n_agents();
    const std::size_t B = cfg_.sync_batch ? cfg_.sync_batch : round_up(sched().M, n);
    while (!should_stop()) {
      const AggregationResult res = aggregate_sync(ctx_, state_.theta_curr, B, sched().H);
      if (!res.gradient.allFinite()) throw Error("non-finite gradient");
      OptimizerState next;
      next.theta_prev = state_.theta_curr;
      next.theta_curr = state_.theta_curr.with_theta(state_.theta_curr.theta + sched().alpha * res.gradient);
      next.d = res.gradient;
      next.t = state_.t + 1;
      state_ = std::move(next);
      log_row();
    }
  }

  void run_greedy() {
    GreedyAsyncStream stream(ctx_, sched().H);
    const auto provider = [this] {
      return state_.t == 0 ? state_.theta_curr : nigt_extrapolate(state_, sched().eta);
    };
    stream.start(provider);
    while (!should_stop()) {
      const GreedyAsyncStream::Arrival a = stream.next(provider);
      const double eta = state_.t == 0 ? 1.0 : sched().eta;
      state_ = nigt_update(state_, a.gradient, eta, sched().alpha);
      log_row();
    }
  }

  void finish_summary() {
    RunSummary& s = record_.summary;
    const auto& rows = record_.rows;
    s.method = to_string(cfg_.kind);
    s.iterations = state_.t;
    s.total_time = rows.back().virtual_time;
    s.best_grad_norm = rows.front().grad_norm_true;
    for (const auto& r : rows) s.best_grad_norm = std::min(s.best_grad_norm, r.grad_norm_true);
    RandomStream pick(cfg_.seed, 0, 0, StreamDomain::kIterate);
    s.sampled_iterate = s.iterations == 0 ? 0 : static_cast<std::size_t>(pick.uniform_int(0, s.iterations - 1));
    s.sampled_grad_norm = rows[s.sampled_iterate].grad_norm_true;
    s.final_J = rows.back().J_true;
    s.J_initial = rows.front().J_true;
    s.J_star = J_star_;
  }

  const MethodConfig& cfg_;
  AggregationContext ctx_;
  MixtureObjective objective_;
  double J_star_ = 0.0;
  OptimizerState state_;
  RunRecord record_;
  std::chrono::steady_clock::time_point wall_start_;
};

}  // namespace

RunRecord run_method(const MethodConfig& config) { return Runner(config).run(); }

std::string to_csv(const RunRecord& record) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& r : record.rows) {
    out += std::to_string(r.iteration);
    out += ',';
    out += format_double(r.virtual_time);
    out += ',';
    out += format_double(r.grad_norm_true);
    out += ',';
    out += format_double(r.J_true);
    out += ',';
    out += std::to_string(r.samples_cum);
    out += ',';
    out += std::to_string(r.comms_cum);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    out += format_double(r.alpha);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

}  // namespace

nlohmann::json to_json(const RunSummary& s) {
  return {{"method", s.method},
          {"iterations", s.iterations},
          {"total_time", s.total_time},
          {"best_grad_norm", s.best_grad_norm},
          {"sampled_iterate", s.sampled_iterate},
          {"sampled_grad_norm", s.sampled_grad_norm},
          {"final_J", s.final_J},
          {"J_initial", s.J_initial},
          {"J_star", s.J_star},
          {"reached_target", s.reached_target},
          {"time_to_target", finite_or_null(s.time_to_target)},
          {"iteration_to_target", s.reached_target ? nlohmann::json(s.iteration_to_target) : nlohmann::json()},
          {"stop_reason", s.stop_reason}};
}

}  // namespace apg
