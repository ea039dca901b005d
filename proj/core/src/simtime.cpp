#include "apg/simtime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "apg/rng.hpp"

namespace apg {

TimeModel TimeModel::uniform(std::size_t n, double step_time, double kappa) {
  TimeModel tm;
  tm.step_times.assign(n, step_time);
  tm.kappas = {kappa};
  tm.validate();
  return tm;
}

TimeModel TimeModel::from_steps(std::vector<double> steps, double kappa) {
  TimeModel tm;
  tm.step_times = std::move(steps);
  tm.kappas = {kappa};
  tm.validate();
  return tm;
}

namespace {

void check_time(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(std::string(what) + " must be nonnegative and finite");
  }
}

}  // namespace

void TimeModel::validate() const {
  const std::size_t n = n_agents();
  if (n == 0) throw Error("time model has no agents");
  if (is_table()) {
    for (const auto& row : step_table) {
      if (row.size() != n) throw Error("every step_table row needs one entry per agent");
      for (double x : row) check_time(x, "step time");
    }
  } else {
    for (double x : step_times) check_time(x, "step time");
  }
  if (kappas.empty()) throw Error("kappa must be given");
  if (kappas.size() != 1 && kappas.size() != n) {
    throw Error("kappa_per_agent must have one entry per agent (" + std::to_string(n) + "), got " +
                std::to_string(kappas.size()));
  }
  for (double k : kappas) check_time(k, "kappa");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw Error("jitter must lie in [0, 1)");
}

std::size_t TimeModel::n_agents() const {
  return is_table() ? step_table.front().size() : step_times.size();
}

double TimeModel::step_time(std::size_t round, std::size_t agent) const {
  if (agent >= n_agents()) throw Error("agent index out of range");
  if (!is_table()) return step_times[agent];
  if (round >= step_table.size()) {
    if (!wrap_table) throw Error("time table has no entry for round " + std::to_string(round));
    round %= step_table.size();
  }
  return step_table[round][agent];
}

std::vector<double> TimeModel::sorted_step_times(std::size_t round) const {
  std::vector<double> out(n_agents());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = step_time(round, i);
  std::sort(out.begin(), out.end());
  return out;
}

double TimeModel::kappa() const { return *std::max_element(kappas.begin(), kappas.end()); }

double TimeModel::kappa_of(std::size_t agent) const {
  if (kappas.size() == 1) return kappas.front();
  if (agent >= kappas.size()) throw Error("agent index out of range");
  return kappas[agent];
}

double TimeModel::jitter_factor(std::size_t agent, std::uint64_t sample_index) const {
  if (jitter == 0.0) return 1.0;
  RandomStream stream(jitter_seed, agent, sample_index, StreamDomain::kJitter);
  return 1.0 - jitter * stream.uniform();
}

double gradient_completion(const TimeModel& tm, std::size_t agent, std::size_t round, std::size_t horizon,
                           double start, std::uint64_t sample_index) {
  const double duration = tm.step_time(round, agent) * static_cast<double>(horizon);
  return start + duration * tm.jitter_factor(agent, sample_index);
}

double round_comm_cost(const TimeModel& tm) { return 2.0 * tm.kappa(); }

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kGradientComplete:
      return "gradient-complete";
    case EventKind::kBroadcastDone:
      return "broadcast-done";
    case EventKind::kReduceDone:
      return "reduce-done";
  }
  return "unknown";
}

void Simulator::schedule(double time, std::size_t agent, EventKind kind) {
  inject(SimEvent{time, agent, next_seq_, kind});
}

void Simulator::inject(const SimEvent& event) {
  if (!(event.time >= clock_.now)) {
    throw std::logic_error("event scheduled in the past: t=" + format_double(event.time) +
                           " < now=" + format_double(clock_.now));
  }
  queue_.push(event);
  next_seq_ = std::max(next_seq_, event.seq + 1);
}

const Clock& Simulator::run(const Handler& handler, const StopPredicate& stop) {
  while (!stop(clock_) && !queue_.empty()) {
    const SimEvent ev = queue_.top();
    queue_.pop();
    clock_.now = ev.time;
    ++clock_.events_processed;
    if (trace_on_) {
      trace_ += format_double(ev.time);
      trace_ += '\t';
      trace_ += std::to_string(ev.agent);
      trace_ += '\t';
      trace_ += std::to_string(ev.seq);
      trace_ += '\t';
      trace_ += to_string(ev.kind);
      trace_ += '\n';
    }
    handler(ev, *this);
  }
  return clock_;
}

void Simulator::discard_pending() {
  decltype(queue_) empty;
  queue_.swap(empty);
}

Clock run_events(const std::vector<SimEvent>& initial, const Simulator::Handler& handler,
                 const Simulator::StopPredicate& stop) {
  Simulator sim;
  for (const auto& ev : initial) sim.inject(ev);
  return sim.run(handler, stop);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace apg
