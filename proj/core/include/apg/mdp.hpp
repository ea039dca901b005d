#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "apg/common.hpp"
#include "apg/rng.hpp"

namespace apg {

/// Finite discounted MDP. Tables are stored flat in row-major order:
/// transition[(s * n_actions + a) * n_states + s'], reward[s * n_actions + a].
struct MdpSpec {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  std::vector<double> rho;
  double gamma = 0.0;
  double r_max = 0.0;

  double P(std::size_t s, std::size_t a, std::size_t next) const {
    return transition[(s * n_actions + a) * n_states + next];
  }
  double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }
  std::size_t dim() const { return n_states * n_actions; }

  bool operator==(const MdpSpec&) const = default;
};

/// Checks every MdpSpec invariant and returns the spec unchanged.
/// Throws apg::Error naming the first violated invariant.
MdpSpec validate_mdp(MdpSpec spec);

/// Tabular softmax parameters, one coordinate per (state, action).
struct PolicyParams {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  Vector theta;

  static PolicyParams zeros(std::size_t n_states, std::size_t n_actions);
  static PolicyParams zeros(const MdpSpec& spec) { return zeros(spec.n_states, spec.n_actions); }
  PolicyParams with_theta(Vector values) const;

  std::size_t index(std::size_t s, std::size_t a) const { return s * n_actions + a; }
  std::size_t dim() const { return n_states * n_actions; }
};

Vector policy_probs(const PolicyParams& params, std::size_t s);

/// Full-length score vector; only the block of state `s` is nonzero.
Vector grad_log_pi(const PolicyParams& params, std::size_t s, std::size_t a);

/// Hessian of log pi(a|s); the state-s block is -(diag(pi) - pi pi^T).
Matrix hessian_log_pi(const PolicyParams& params, std::size_t s, std::size_t a);

struct Trajectory {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;
  std::vector<double> rewards;

  std::size_t horizon() const { return states.size(); }
};

Trajectory sample_trajectory(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon,
                             RandomStream& stream);

/// Softmax score-function bounds used by the smoothness constants.
struct SoftmaxBounds {
  static inline const double kMg = 1.4142135623730951;  // sqrt(2)
  static constexpr double kMh = 1.0;
  static constexpr double kL2 = 2.0;
};

nlohmann::json mdp_to_json(const MdpSpec& spec);
/// Parses and validates.
MdpSpec mdp_from_json(const nlohmann::json& doc);
MdpSpec load_mdp(const std::string& path);

/// The frozen 2-state, 2-action benchmark (gamma = 0.9, rewards in [-1, 1]).
MdpSpec benchmark_mdp();

/// Relabels states: state s of the result behaves like state perm[s] of the input.
MdpSpec permute_states(const MdpSpec& spec, const std::vector<std::size_t>& perm);

/// MDP with every reward equal to zero; handy for degenerate checks.
MdpSpec zero_reward(MdpSpec spec);

}  // namespace apg
