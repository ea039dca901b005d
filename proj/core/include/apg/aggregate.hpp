#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "apg/mdp.hpp"
#include "apg/simtime.hpp"

namespace apg {

/// Shared state of one distributed run: environments, timing, the virtual
/// clock and per-agent sample counters. Sample indices only ever grow, so a
/// discarded in-flight sample is never reused.
struct AggregationContext {
  std::vector<MdpSpec> envs;  ///< one spec, or one per agent when heterogeneous
  bool heterogeneous = false;
  TimeModel time;
  std::uint64_t seed = 0;
  Simulator sim;
  std::vector<std::uint64_t> next_index;  ///< next unused sample index per agent
  std::size_t round = 0;                  ///< rounds started so far (selects step_table rows)
  std::uint64_t comms = 0;                ///< one-vector transfers charged so far
  std::uint64_t samples = 0;              ///< gradients accepted so far
  bool timing_only = false;               ///< skip rollouts; gradients are reported as zero

  static AggregationContext homogeneous(MdpSpec spec, TimeModel tm, std::uint64_t seed);
  static AggregationContext make_heterogeneous(std::vector<MdpSpec> envs, TimeModel tm, std::uint64_t seed);

  std::size_t n_agents() const { return time.n_agents(); }
  const MdpSpec& env_of(std::size_t agent) const { return heterogeneous ? envs.at(agent) : envs.front(); }
  std::size_t dim() const { return envs.front().dim(); }
  /// Reserves the next sample index of `agent`.
  std::uint64_t take_index(std::size_t agent) { return next_index.at(agent)++; }
  /// g_H from agent `agent`'s environment with the stream keyed (seed, agent, index).
  Vector sample_gradient(std::size_t agent, std::uint64_t index, const PolicyParams& params,
                         std::size_t H) const;
};

struct AggregationResult {
  Vector gradient;
  double start = 0.0;
  double end = 0.0;
  double elapsed = 0.0;  ///< includes broadcast and reduce
  std::vector<std::size_t> samples_per_agent;
  std::size_t total_samples = 0;
};

/// First M completed gradients at a fixed point, averaged; in-flight work is dropped.
AggregationResult aggregate_rennala(AggregationContext& ctx, const PolicyParams& params, std::size_t M,
                                    std::size_t H);

/// Collects until the harmonic mean of the per-agent counts reaches M/n, then
/// returns the mean of per-agent means.
AggregationResult aggregate_malenia(AggregationContext& ctx, const PolicyParams& params, std::size_t M,
                                    std::size_t H);

/// B/n lockstep waves, each gated by the slowest agent.
AggregationResult aggregate_sync(AggregationContext& ctx, const PolicyParams& params, std::size_t B,
                                 std::size_t H);

/// True once every count is positive and (1/n sum 1/M_i)^{-1} >= M/n, decided exactly.
bool malenia_exit_reached(const std::vector<std::size_t>& counts, std::size_t M);

/// Greedy per-arrival stream: each finished gradient is delivered on its own
/// (one transfer), after which its worker fetches the current point (another
/// transfer) and starts over.
class GreedyAsyncStream {
 public:
  using Provider = std::function<PolicyParams()>;

  struct Arrival {
    Vector gradient;
    std::size_t agent = 0;
    double time = 0.0;
    std::uint64_t index = 0;
  };

  GreedyAsyncStream(AggregationContext& ctx, std::size_t H);

  /// Hands every worker its first point; call once before next().
  void start(const Provider& provider);
  /// Advances the clock to the next delivery.
  Arrival next(const Provider& provider);
  std::uint64_t deliveries() const { return deliveries_; }

 private:
  AggregationContext& ctx_;
  std::size_t H_;
  std::vector<PolicyParams> working_point_;
  std::vector<std::uint64_t> working_index_;
  std::vector<double> done_at_;
  std::vector<bool> refetch_;
  std::uint64_t deliveries_ = 0;
  bool started_ = false;

  void launch(std::size_t agent, double start, const Provider& provider);
};

}  // namespace apg
