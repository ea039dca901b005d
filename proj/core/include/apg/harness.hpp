#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apg/constants.hpp"
#include "apg/mdp.hpp"
#include "apg/nigt.hpp"
#include "apg/simtime.hpp"

namespace apg {

/// An MDP given inline, by file path, or as "benchmark". `source` is empty for
/// inline specs; the resolved spec is always loaded.
struct MdpRef {
  std::string source;
  MdpSpec spec;

  bool operator==(const MdpRef&) const = default;
};

enum class ScheduleSource { kTheory, kExplicit };

struct GlobalInputs {
  double mu_F = 0.0;
  double eps_bias = 0.0;

  bool operator==(const GlobalInputs&) const = default;
};

/// Validated experiment description. Defaults: one agent with unit step
/// time, kappa = 0, centralized communication, theory schedule, seed 0, one seed.
struct RunConfig {
  MethodKind method = MethodKind::kRennalaNigt;
  MdpRef mdp;
  std::vector<MdpRef> environments;  ///< heterogeneous setup when non-empty
  TimeModel time;
  ScheduleSource schedule_source = ScheduleSource::kTheory;
  Schedule schedule;  ///< used when schedule_source is explicit (eps is filled from `eps`)
  double eps = 0.0;
  std::optional<std::size_t> iterations;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::optional<Target> target;
  bool stop_at_target = false;
  std::optional<double> time_budget;
  std::optional<double> wall_budget;
  std::optional<double> delta;
  std::optional<GlobalInputs> global;
  std::size_t sync_batch = 0;
  std::optional<std::vector<double>> theta0;
  bool trace = false;
  std::string output = "out/run";

  bool operator==(const RunConfig&) const = default;
};

/// Strict JSON parser: unknown keys are rejected and missing required keys
/// are named. Relative MDP paths resolve against `base_dir` when given.
RunConfig parse_config(const std::string& text, const std::string& base_dir = "");
RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = "");
inline RunConfig parse_config(const char* text, const std::string& base_dir = "") {
  return parse_config(std::string(text), base_dir);
}
RunConfig load_config(const std::string& path);
nlohmann::json serialize_config(const RunConfig& config);

MdpRef resolve_mdp(const nlohmann::json& ref, const std::string& base_dir = "");

/// Constants, schedule and iteration count a configuration resolves to.
struct RunPlan {
  SmoothnessConstants constants;
  Schedule schedule;
  double iteration_bound = 0.0;
  std::size_t iterations = 0;
  PolicyParams theta0;
};

RunPlan plan_run(const RunConfig& config);

/// Seed used for run k of a multi-seed fan-out.
std::uint64_t derived_seed(std::uint64_t master, std::size_t k);

MethodConfig method_config(const RunConfig& config, const RunPlan& plan, std::uint64_t seed);

struct ExperimentOutput {
  std::string directory;
  std::vector<std::string> csv_paths;
  std::string summary_path;
  nlohmann::json summary;
  std::vector<RunRecord> records;
};

/// Output directory after applying the ASYNCPG_OUTPUT_ROOT override to relative paths.
std::string resolve_output_dir(const std::string& dir);

/// Writes `content` to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

/// Linear-interpolation quantile; infinities propagate.
double quantile(std::vector<double> values, double q);

/// Runs every seed (in parallel when threads > 1), writes seed_k.csv per seed
/// plus summary.json with 20%/50%/80% quantiles across seeds.
ExperimentOutput run_experiment(const RunConfig& config, unsigned threads = 0);

/// Predictor table for a configuration.
nlohmann::json predict_report(const RunConfig& config);
std::string format_predict_table(const nlohmann::json& report);

/// Exact J, grad J, J* and constants at a parameter vector.
nlohmann::json oracle_report(const MdpSpec& spec, const PolicyParams& params, std::size_t H);
std::string format_oracle_report(const nlohmann::json& report);

}  // namespace apg
