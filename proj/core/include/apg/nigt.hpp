#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "apg/aggregate.hpp"
#include "apg/constants.hpp"
#include "apg/estimator.hpp"
#include "apg/mdp.hpp"
#include "apg/simtime.hpp"

namespace apg {

struct OptimizerState {
  PolicyParams theta_prev;
  PolicyParams theta_curr;
  Vector d;
  std::size_t t = 0;

  static OptimizerState start(const PolicyParams& theta0);
};

/// theta_t + (1 - eta) / eta * (theta_t - theta_{t-1}).
PolicyParams nigt_extrapolate(const OptimizerState& state, double eta);

/// Momentum average followed by a step of length alpha along d (no step when d = 0).
OptimizerState nigt_update(const OptimizerState& state, const Vector& g, double eta, double alpha);

enum class MethodKind { kRennalaNigt, kMaleniaNigt, kSyncNigt, kGreedyNigt, kVanillaPg };
std::string to_string(MethodKind kind);
MethodKind parse_method_kind(const std::string& name);

enum class TargetKind { kGradNorm, kJGap };
std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& name);

/// Success criterion: ||grad J|| <= value, or (J* - J) / (J* - J(theta_0)) <= value.
struct Target {
  TargetKind kind = TargetKind::kGradNorm;
  double value = 0.0;

  bool operator==(const Target&) const = default;
};

struct MethodConfig {
  MethodKind kind = MethodKind::kRennalaNigt;
  std::vector<MdpSpec> envs;  ///< one spec, or one per agent
  bool heterogeneous = false;
  TimeModel time;
  Schedule schedule;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;
  std::optional<PolicyParams> theta0;  ///< zeros when absent
  std::size_t sync_batch = 0;          ///< sync/vanilla batch; 0 rounds M up to a multiple of n
  double time_budget = std::numeric_limits<double>::infinity();  ///< virtual seconds
  double wall_budget = std::numeric_limits<double>::infinity();  ///< real seconds
  std::optional<Target> target;
  bool stop_at_target = false;
  bool trace = false;
  bool keep_iterates = false;  ///< store every logged theta in RunRecord::iterates
};

struct RunRow {
  std::size_t iteration = 0;
  double virtual_time = 0.0;
  double grad_norm_true = 0.0;
  double J_true = 0.0;
  std::uint64_t samples_cum = 0;
  std::uint64_t comms_cum = 0;
  double eta = 0.0;
  double alpha = 0.0;
};

struct RunSummary {
  std::string method;
  std::size_t iterations = 0;
  double total_time = 0.0;
  double best_grad_norm = 0.0;
  std::size_t sampled_iterate = 0;  ///< index drawn uniformly from {0, ..., T-1}
  double sampled_grad_norm = 0.0;
  double final_J = 0.0;
  double J_star = 0.0;
  double J_initial = 0.0;
  bool reached_target = false;
  double time_to_target = std::numeric_limits<double>::infinity();
  std::size_t iteration_to_target = 0;
  std::string stop_reason;
};

struct RunRecord {
  std::vector<RunRow> rows;
  RunSummary summary;
  std::string trace;  ///< event trace when requested
  std::vector<Vector> iterates;  ///< logged thetas when keep_iterates is set
};

/// Runs one method end to end on the virtual clock, logging exact J and
/// ||grad J|| at every iterate.
RunRecord run_method(const MethodConfig& config);

inline constexpr const char* kMetricsHeader =
    "iteration,virtual_time,grad_norm_true,J_true,samples_cum,comms_cum,eta,alpha";

std::string to_csv(const RunRecord& record);
nlohmann::json to_json(const RunSummary& summary);

/// Mean objective over the environments and its exact gradient.
struct MixtureObjective {
  std::vector<MdpSpec> envs;
  double J_star() const;
  ValueAndGradient evaluate(const PolicyParams& params) const;
};

}  // namespace apg
