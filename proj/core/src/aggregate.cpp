#include "apg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "apg/estimator.hpp"
#include "apg/rng.hpp"

namespace apg {

AggregationContext AggregationContext::homogeneous(MdpSpec spec, TimeModel tm, std::uint64_t seed) {
  tm.validate();
  AggregationContext ctx;
  ctx.envs = {validate_mdp(std::move(spec))};
  ctx.heterogeneous = false;
  ctx.time = std::move(tm);
  ctx.seed = seed;
  ctx.next_index.assign(ctx.time.n_agents(), 0);
  return ctx;
}

AggregationContext AggregationContext::make_heterogeneous(std::vector<MdpSpec> envs, TimeModel tm,
                                                          std::uint64_t seed) {
  tm.validate();
  if (envs.size() != tm.n_agents()) {
    throw Error("heterogeneous context needs one environment per agent (" + std::to_string(tm.n_agents()) +
                "), got " + std::to_string(envs.size()));
  }
  for (auto& e : envs) {
    e = validate_mdp(std::move(e));
    if (e.n_states != envs.front().n_states || e.n_actions != envs.front().n_actions) {
      throw Error("heterogeneous environments must share state and action counts");
    }
  }
  AggregationContext ctx;
  ctx.envs = std::move(envs);
  ctx.heterogeneous = true;
  ctx.time = std::move(tm);
  ctx.seed = seed;
  ctx.next_index.assign(ctx.time.n_agents(), 0);
  return ctx;
}

Vector AggregationContext::sample_gradient(std::size_t agent, std::uint64_t index, const PolicyParams& params,
                                           std::size_t H) const {
  if (timing_only) return Vector::Zero(static_cast<Eigen::Index>(dim()));
  const MdpSpec& env = env_of(agent);
  RandomStream stream(seed, agent, index, StreamDomain::kTrajectory);
  const Trajectory traj = sample_trajectory(env, params, H, stream);
  return estimate_gH(traj, params, env.gamma).vector;
}

namespace {

/// Per-round bookkeeping shared by the three batch protocols.
struct RoundState {
  std::size_t round = 0;
  double start = 0.0;
  std::vector<std::uint64_t> inflight;
  std::vector<Vector> local;
  std::vector<std::size_t> counts;
  bool done = false;

  RoundState(AggregationContext& ctx)
      : round(ctx.round++),
        start(ctx.sim.now()),
        inflight(ctx.n_agents(), 0),
        local(ctx.n_agents(), Vector::Zero(static_cast<Eigen::Index>(ctx.dim()))),
        counts(ctx.n_agents(), 0) {}
};

void launch(AggregationContext& ctx, RoundState& st, std::size_t agent, double begin, std::size_t H) {
  st.inflight[agent] = ctx.take_index(agent);
  ctx.sim.schedule(gradient_completion(ctx.time, agent, st.round, H, begin, st.inflight[agent]), agent,
                   EventKind::kGradientComplete);
}

void accept(AggregationContext& ctx, RoundState& st, std::size_t agent, const PolicyParams& params,
            std::size_t H) {
  if (!ctx.timing_only) st.local[agent] += ctx.sample_gradient(agent, st.inflight[agent], params, H);
  ++st.counts[agent];
}

void check_homogeneous_dims(const AggregationContext& ctx, const PolicyParams& params) {
  if (params.dim() != ctx.dim()) throw Error("parameter dimension does not match the environment");
}

/// Charges the reduce step and fills the timing fields.
AggregationResult finish(AggregationContext& ctx, RoundState& st) {
  double cost = 0.0;
  for (std::size_t i = 0; i < ctx.n_agents(); ++i) {
    if (ctx.time.mode == CommMode::kAllReduce || st.counts[i] > 0) cost = std::max(cost, ctx.time.kappa_of(i));
  }
  bool reduced = false;
  ctx.sim.schedule(ctx.sim.now() + cost, 0, EventKind::kReduceDone);
  ctx.sim.run([&](const SimEvent& ev, Simulator&) { reduced = ev.kind == EventKind::kReduceDone; },
              [&](const Clock&) { return reduced; });

  AggregationResult res;
  res.start = st.start;
  res.end = ctx.sim.now();
  res.elapsed = res.end - res.start;
  res.samples_per_agent = st.counts;
  res.total_samples = std::accumulate(st.counts.begin(), st.counts.end(), std::size_t{0});
  ctx.comms += 2;
  ctx.samples += res.total_samples;
  return res;
}

template <typename Accepted>
void collect(AggregationContext& ctx, RoundState& st, const PolicyParams& params, std::size_t H,
             Accepted on_accept) {
  for (std::size_t i = 0; i < ctx.n_agents(); ++i) launch(ctx, st, i, st.start + ctx.time.kappa_of(i), H);
  ctx.sim.run(
      [&](const SimEvent& ev, Simulator& sim) {
        if (ev.kind != EventKind::kGradientComplete) return;
        accept(ctx, st, ev.agent, params, H);
        if (on_accept(ev.agent)) {
          st.done = true;
          sim.discard_pending();
          return;
        }
        launch(ctx, st, ev.agent, sim.now(), H);
      },
      [&](const Clock&) { return st.done; });
}

}  // namespace

AggregationResult aggregate_rennala(AggregationContext& ctx, const PolicyParams& params, std::size_t M,
                                    std::size_t H) {
  if (ctx.heterogeneous) throw Error("Rennala aggregation requires a homogeneous context");
  if (M == 0) throw Error("batch size M must be at least 1");
  check_homogeneous_dims(ctx, params);
  RoundState st(ctx);
  std::size_t accepted = 0;
  collect(ctx, st, params, H, [&](std::size_t) { return ++accepted == M; });
  AggregationResult res = finish(ctx, st);
  Vector sum = st.local[0];
  for (std::size_t i = 1; i < st.local.size(); ++i) sum += st.local[i];
  res.gradient = sum / static_cast<double>(M);
  return res;
}

AggregationResult aggregate_malenia(AggregationContext& ctx, const PolicyParams& params, std::size_t M,
                                    std::size_t H) {
  if (M == 0) throw Error("batch size M must be at least 1");
  check_homogeneous_dims(ctx, params);
  RoundState st(ctx);
  collect(ctx, st, params, H, [&](std::size_t) { return malenia_exit_reached(st.counts, M); });
  AggregationResult res = finish(ctx, st);
  Vector sum = st.local[0] / static_cast<double>(st.counts[0]);
  for (std::size_t i = 1; i < st.local.size(); ++i) sum += st.local[i] / static_cast<double>(st.counts[i]);
  res.gradient = sum / static_cast<double>(st.local.size());
  return res;
}

AggregationResult aggregate_sync(AggregationContext& ctx, const PolicyParams& params, std::size_t B,
                                 std::size_t H) {
  const std::size_t n = ctx.n_agents();
  if (B == 0 || B % n != 0) {
    throw Error("sync batch B=" + std::to_string(B) + " must be a positive multiple of n=" + std::to_string(n));
  }
  check_homogeneous_dims(ctx, params);
  RoundState st(ctx);
  const std::size_t waves = B / n;
  std::size_t wave = 0;
  std::size_t finished = 0;
  for (std::size_t i = 0; i < n; ++i) launch(ctx, st, i, st.start + ctx.time.kappa_of(i), H);
  ctx.sim.run(
      [&](const SimEvent& ev, Simulator& sim) {
        if (ev.kind != EventKind::kGradientComplete) return;
        accept(ctx, st, ev.agent, params, H);
        if (++finished < n) return;
        finished = 0;
        if (++wave == waves) {
          st.done = true;
          return;
        }
        for (std::size_t i = 0; i < n; ++i) launch(ctx, st, i, sim.now(), H);
      },
      [&](const Clock&) { return st.done; });
  AggregationResult res = finish(ctx, st);
  Vector sum = st.local[0];
  for (std::size_t i = 1; i < n; ++i) sum += st.local[i];
  res.gradient = sum / static_cast<double>(B);
  return res;
}

namespace {

__extension__ typedef unsigned __int128 u128;

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Exact sign of n^2 - M * sum 1/M_i, or nullopt when the rational overflows.
std::optional<int> exact_compare(const std::vector<std::size_t>& counts, std::size_t M) {
  u128 num = 0;
  u128 den = 1;
  const u128 cap = static_cast<u128>(1) << 100;
  for (std::size_t c : counts) {
    // num/den + 1/c = (num*c + den) / (den*c), reduced.
    const u128 cc = c;
    if (den > cap / cc || num > cap / cc) return std::nullopt;
    num = num * cc + den;
    den = den * cc;
    const u128 g = gcd128(num, den);
    num /= g;
    den /= g;
  }
  const u128 n = counts.size();
  if (den > cap / (n * n) || num > cap / M) return std::nullopt;
  const u128 lhs = n * n * den;
  const u128 rhs = static_cast<u128>(M) * num;
  return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
}

}  // namespace

bool malenia_exit_reached(const std::vector<std::size_t>& counts, std::size_t M) {
  if (counts.empty()) throw Error("no agents");
  double inv_sum = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) return false;
    inv_sum += 1.0 / static_cast<double>(c);
  }
  const double n = static_cast<double>(counts.size());
  const double lhs = n * n;
  const double rhs = static_cast<double>(M) * inv_sum;
  if (lhs > rhs * (1.0 + 1e-12)) return true;
  if (lhs < rhs * (1.0 - 1e-12)) return false;
  if (const auto sign = exact_compare(counts, M)) return *sign >= 0;
  long double s = 0.0L;
  for (std::size_t c : counts) s += 1.0L / static_cast<long double>(c);
  return static_cast<long double>(lhs) >= static_cast<long double>(M) * s;
}

GreedyAsyncStream::GreedyAsyncStream(AggregationContext& ctx, std::size_t H)
    : ctx_(ctx),
      H_(H),
      working_point_(ctx.n_agents()),
      working_index_(ctx.n_agents(), 0),
      done_at_(ctx.n_agents(), 0.0),
      refetch_(ctx.n_agents(), false) {
  if (H == 0) throw Error("horizon must be at least 1");
}

void GreedyAsyncStream::launch(std::size_t agent, double fetch_time, const Provider& provider) {
  working_point_[agent] = provider();
  working_index_[agent] = ctx_.take_index(agent);
  ++ctx_.comms;
  const double begin = fetch_time + ctx_.time.kappa_of(agent);
  ctx_.sim.schedule(gradient_completion(ctx_.time, agent, ctx_.round, H_, begin, working_index_[agent]), agent,
                    EventKind::kGradientComplete);
}

void GreedyAsyncStream::start(const Provider& provider) {
  if (started_) throw Error("greedy stream already started");
  started_ = true;
  const double now = ctx_.sim.now();
  for (std::size_t i = 0; i < ctx_.n_agents(); ++i) launch(i, now, provider);
}

GreedyAsyncStream::Arrival GreedyAsyncStream::next(const Provider& provider) {
  if (!started_) throw Error("greedy stream used before start()");
  for (std::size_t i = 0; i < ctx_.n_agents(); ++i) {
    if (refetch_[i]) {
      refetch_[i] = false;
      launch(i, done_at_[i], provider);
    }
  }
  Arrival arrival;
  bool arrived = false;
  ctx_.sim.run(
      [&](const SimEvent& ev, Simulator& sim) {
        const std::size_t i = ev.agent;
        if (ev.kind == EventKind::kGradientComplete) {
          ++ctx_.samples;
          sim.schedule(sim.now() + ctx_.time.kappa_of(i), i, EventKind::kReduceDone);
          return;
        }
        if (ev.kind != EventKind::kReduceDone) return;
        arrival.gradient = ctx_.sample_gradient(i, working_index_[i], working_point_[i], H_);
        arrival.agent = i;
        arrival.time = sim.now();
        arrival.index = working_index_[i];
        ++ctx_.comms;
        ++ctx_.round;
        ++deliveries_;
        refetch_[i] = true;
        done_at_[i] = sim.now();
        arrived = true;
      },
      [&](const Clock&) { return arrived; });
  if (!arrived) throw Error("greedy stream ran out of events");
  return arrival;
}

}  // namespace apg
