#pragma once

#include <cstdint>
#include <span>

#include "apg/common.hpp"
#include "apg/mdp.hpp"

namespace apg {

struct GradientEstimate {
  Vector vector;
  std::size_t n_samples = 0;
  std::size_t horizon = 0;
};

/// Truncated REINFORCE estimate: sum_t (sum_{h>=t} gamma^h r_h) grad log pi(a_t|s_t).
GradientEstimate estimate_gH(const Trajectory& trajectory, const PolicyParams& params, double gamma);

/// Largest number of length-H trajectories the enumeration oracle will visit.
inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;

struct EnumerationResult {
  double J_H = 0.0;
  Vector grad_JH;
};

/// Exact E[g_H] and J_H by enumerating every (s, a) sequence of length H.
/// Throws when (n_states * n_actions)^H exceeds kEnumerationBudget.
EnumerationResult enumerate_JH(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon);

inline Vector exact_grad_JH_bruteforce(const MdpSpec& spec, const PolicyParams& params,
                                       std::size_t horizon) {
  return enumerate_JH(spec, params, horizon).grad_JH;
}

struct ExactGradientReport {
  Vector grad_JH;
  Vector grad_J;
  double J = 0.0;
  double J_H = 0.0;
  double J_star = 0.0;
  double bias_norm = 0.0;
};

/// Infinite-horizon J and grad J from two linear solves, J* from value iteration,
/// and grad J_H from a finite-horizon forward/backward recursion.
ExactGradientReport exact_J_and_grad(const MdpSpec& spec, const PolicyParams& params,
                                     std::size_t horizon);

struct ValueAndGradient {
  double J = 0.0;
  Vector grad;
};

ValueAndGradient exact_J(const MdpSpec& spec, const PolicyParams& params);
ValueAndGradient exact_JH(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon);

/// Optimal return rho^T v* (value iteration to 1e-10, then exact evaluation of the greedy policy).
double optimal_value(const MdpSpec& spec);

struct MomentReport {
  Vector mean;
  Vector std_error;   ///< componentwise standard error of the mean
  double variance = 0.0;  ///< mean of ||g_H - grad J_H||^2
  Vector exact;       ///< brute-force grad J_H
  std::size_t n_samples = 0;
};

/// Monte Carlo moments of g_H from N samples with streams keyed (seed, 0, i).
/// Reductions use a fixed-shape pairwise tree, so results do not depend on `threads`.
MomentReport empirical_moments(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon,
                               std::size_t n_samples, std::uint64_t seed, unsigned threads = 0);

/// Pairwise (fixed-shape) summation of equally sized vectors.
Vector pairwise_sum(std::span<const Vector> items);
double pairwise_sum(std::span<const double> items);

}  // namespace apg
