#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "apg/common.hpp"

namespace apg {

enum class CommMode { kCentralized, kAllReduce };

/// Per-agent computation and communication times. Times are virtual seconds;
/// step times are per environment transition, so one truncated gradient on
/// agent i costs step_time(i) * H.
struct TimeModel {
  std::vector<double> step_times;               ///< static per-agent step times
  std::vector<std::vector<double>> step_table;  ///< per-round rows; used when non-empty
  bool wrap_table = false;                      ///< index rows modulo the table length
  std::vector<double> kappas{0.0};              ///< one shared value or one per agent
  CommMode mode = CommMode::kCentralized;
  double jitter = 0.0;  ///< durations scaled by U[1 - jitter, 1]
  std::uint64_t jitter_seed = 0;

  static TimeModel uniform(std::size_t n, double step_time, double kappa = 0.0);
  static TimeModel from_steps(std::vector<double> steps, double kappa = 0.0);

  /// Throws on negative or non-finite entries and inconsistent lengths.
  void validate() const;

  std::size_t n_agents() const;
  bool is_table() const { return !step_table.empty(); }
  double step_time(std::size_t round, std::size_t agent) const;
  /// Step times of the given round in ascending order.
  std::vector<double> sorted_step_times(std::size_t round = 0) const;
  /// Largest per-agent communication time.
  double kappa() const;
  double kappa_of(std::size_t agent) const;
  /// Multiplicative jitter factor for one sample (1 when jitter is off).
  double jitter_factor(std::size_t agent, std::uint64_t sample_index) const;

  bool operator==(const TimeModel&) const = default;
};

/// start + step_time(round, agent) * H, scaled by the sample's jitter factor.
double gradient_completion(const TimeModel& tm, std::size_t agent, std::size_t round, std::size_t horizon,
                           double start, std::uint64_t sample_index = 0);

/// Broadcast plus reduce: 2 * kappa in both communication modes.
double round_comm_cost(const TimeModel& tm);

enum class EventKind { kGradientComplete, kBroadcastDone, kReduceDone };
const char* to_string(EventKind kind);

struct SimEvent {
  double time = 0.0;
  std::size_t agent = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kGradientComplete;
};

/// Strict total order (time, agent, seq).
struct EventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.agent != b.agent) return a.agent > b.agent;
    return a.seq > b.seq;
  }
};

struct Clock {
  double now = 0.0;
  std::uint64_t events_processed = 0;
};

/// Single-threaded virtual-clock event loop. The clock and the sequence
/// counter persist across run() calls so one simulator can drive a whole
/// training run.
class Simulator {
 public:
  using Handler = std::function<void(const SimEvent&, Simulator&)>;
  using StopPredicate = std::function<bool(const Clock&)>;

  /// Enqueues an event; times in the past are a model bug and throw std::logic_error.
  void schedule(double time, std::size_t agent, EventKind kind);
  /// Enqueues a fully formed event, keeping its sequence number.
  void inject(const SimEvent& event);

  /// Processes events in order until `stop` holds or the queue drains.
  const Clock& run(const Handler& handler, const StopPredicate& stop);

  /// Drops every pending event ("stop all calculations").
  void discard_pending();

  const Clock& clock() const { return clock_; }
  double now() const { return clock_.now; }
  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }

  void enable_trace(bool on) { trace_on_ = on; }
  /// One line per processed event: time, agent, seq, kind (tab separated).
  const std::string& trace() const { return trace_; }

 private:
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> queue_;
  Clock clock_;
  std::uint64_t next_seq_ = 0;
  bool trace_on_ = false;
  std::string trace_;
};

/// Runs a fresh simulator seeded with `initial` events.
Clock run_events(const std::vector<SimEvent>& initial, const Simulator::Handler& handler,
                 const Simulator::StopPredicate& stop);

/// Shortest round-trip representation of a double, used for traces and CSVs.
std::string format_double(double x);

}  // namespace apg
