#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "apg/mdp.hpp"
#include "apg/simtime.hpp"

namespace apg {

/// Smoothness, bias and variance constants of the softmax objective.
struct SmoothnessConstants {
  double M_g = 0.0;
  double M_h = 0.0;
  double l_2 = 0.0;
  double r_max = 0.0;
  double gamma = 0.0;
  std::size_t H = 1;
  double L_g = 0.0;
  double L_h = 0.0;
  double sigma2 = 0.0;
  double D_g = 0.0;  ///< gradient truncation-bias scale at horizon H
  double D_h = 0.0;  ///< Hessian truncation-bias scale at horizon H
  double Delta = 0.0;
};

SmoothnessConstants compute_constants(double M_g, double M_h, double l_2, double r_max, double gamma,
                                      std::size_t H, double Delta);

/// Constants for the tabular softmax class (M_g = sqrt 2, M_h = 1, l_2 = 2).
SmoothnessConstants softmax_constants(const MdpSpec& spec, std::size_t H, double Delta);

/// Same constants with D_g and D_h re-evaluated at another horizon.
SmoothnessConstants at_horizon(SmoothnessConstants c, std::size_t H);

/// Optimality gap J* - J(theta) from the exact oracles.
double exact_delta(const MdpSpec& spec, const PolicyParams& params);

inline constexpr std::size_t kMaxHorizon = 10'000;

struct Schedule {
  double eta = 0.5;
  double alpha = 0.0;
  std::size_t H = 1;
  std::size_t M = 1;
  std::size_t M_init = 1;
  double eps = 0.0;

  bool operator==(const Schedule&) const = default;
};

/// Smallest integer H >= 1 with gamma^H <= eps * eta / (64 * scale), capped at kMaxHorizon.
std::size_t horizon_for(double gamma, double eps, double eta, double scale);

/// Step sizes and horizon for the given batch sizes, using c.D_g and c.D_h as stored.
Schedule make_schedule(const SmoothnessConstants& c, double eps, std::size_t M, std::size_t M_init);

struct BatchSizes {
  std::size_t M = 1;
  std::size_t M_init = 1;
};

BatchSizes choose_batches(const SmoothnessConstants& c, double eps);

/// Batch sizes from choose_batches, then the horizon iterated to a fixed
/// point since D_g and D_h themselves depend on H. Returns the constants at
/// the final horizon through `resolved` when given.
Schedule theory_schedule(const SmoothnessConstants& c, double eps,
                         SmoothnessConstants* resolved = nullptr);

/// Inputs and derived quantities of the gradient-domination variant.
struct GlobalParams {
  double mu_F = 0.0;
  double eps_bias = 0.0;
  double mu = 0.0;
  double eps_prime = 0.0;
};

GlobalParams make_global_params(double mu_F, double eps_bias, double M_g, double gamma);
BatchSizes choose_batches_global(const SmoothnessConstants& c, const GlobalParams& g, double eps);
Schedule make_global_schedule(const SmoothnessConstants& c, const GlobalParams& g, double eps,
                              std::size_t M, std::size_t M_init);
Schedule theory_schedule_global(const SmoothnessConstants& c, const GlobalParams& g, double eps,
                                SmoothnessConstants* resolved = nullptr);

/// Stationarity iteration count with every hidden constant set to one.
double iteration_bound(const SmoothnessConstants& c, const Schedule& s);

enum class PredictorKind {
  kRennalaCompute,
  kRennalaTotal,
  kMaleniaTotal,
  kAnyTime,
  kLowerBound,
  kRennalaGlobal,
  kMaleniaGlobal,
};

std::string to_string(PredictorKind kind);
PredictorKind parse_predictor_kind(const std::string& name);
const std::vector<PredictorKind>& all_predictor_kinds();

/// min over m of (sum_{i<=m} 1/h_(i))^{-1} * (a * m + b) with h sorted ascending,
/// i.e. the harmonic-mean scan shared by every predictor and the round bounds.
double harmonic_scan(std::vector<double> h, double per_agent, double shared);

/// Closed-form time predictions with all hidden constants set to one. Step
/// times come from the time model (per-step seconds), kappa is its maximum.
/// The global kinds need `global`.
double predict_time(PredictorKind kind, const SmoothnessConstants& c, const Schedule& s,
                    const TimeModel& tm, const std::optional<GlobalParams>& global = std::nullopt);

/// Upper bound on one Rennala round for per-gradient times h (seconds).
double rennala_round_bound(const std::vector<double>& h, std::size_t M, double kappa);
/// Upper bound on one Malenia round for per-gradient times h (seconds).
double malenia_round_bound(const std::vector<double>& h, std::size_t M, double kappa);

nlohmann::json to_json(const SmoothnessConstants& c);
nlohmann::json to_json(const Schedule& s);
nlohmann::json to_json(const GlobalParams& g);

}  // namespace apg
