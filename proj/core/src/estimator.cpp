#include "apg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include <Eigen/LU>

namespace apg {

namespace {

// Row-major [s][a] table of pi(a|s).
Matrix policy_table(const PolicyParams& params) {
  Matrix pi(static_cast<Eigen::Index>(params.n_states), static_cast<Eigen::Index>(params.n_actions));
  for (std::size_t s = 0; s < params.n_states; ++s) {
    pi.row(static_cast<Eigen::Index>(s)) = policy_probs(params, s).transpose();
  }
  return pi;
}

void check_dims(const MdpSpec& spec, const PolicyParams& params) {
  if (spec.n_states != params.n_states || spec.n_actions != params.n_actions) {
    throw Error("policy dimensions do not match the MDP");
  }
}

// score(s, a) added with weight w into g.
void add_score(Vector& g, const Matrix& pi, std::size_t n_actions, std::size_t s, std::size_t a, double w) {
  const auto base = static_cast<Eigen::Index>(s * n_actions);
  const auto row = static_cast<Eigen::Index>(s);
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(n_actions); ++b) g[base + b] -= w * pi(row, b);
  g[base + static_cast<Eigen::Index>(a)] += w;
}

Matrix transition_under(const MdpSpec& spec, const Matrix& pi) {
  const auto ns = static_cast<Eigen::Index>(spec.n_states);
  Matrix P = Matrix::Zero(ns, ns);
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      const double w = pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      for (std::size_t next = 0; next < spec.n_states; ++next) {
        P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(next)) += w * spec.P(s, a, next);
      }
    }
  }
  return P;
}

Vector solve_checked(const Matrix& A, const Vector& b) {
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) throw Error("linear solve failed: singular system (non-stochastic kernel?)");
  return lu.solve(b);
}

struct Enumerator {
  const MdpSpec& spec;
  const Matrix& pi;
  std::size_t horizon;
  std::vector<double> discount;
  std::vector<Vector> score_prefix;  // cumulative score per depth
  EnumerationResult result;

  void visit(std::size_t depth, std::size_t s, double prob) {
    const Vector& prev = score_prefix[depth];
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      const double pa = prob * pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (pa == 0.0) continue;
      Vector& cum = score_prefix[depth + 1];
      cum = prev;
      add_score(cum, pi, spec.n_actions, s, a, 1.0);
      const double weight = pa * discount[depth] * spec.r(s, a);
      result.J_H += weight;
      result.grad_JH += weight * cum;
      if (depth + 1 == horizon) continue;
      for (std::size_t next = 0; next < spec.n_states; ++next) {
        const double p_next = spec.P(s, a, next);
        if (p_next == 0.0) continue;
        visit(depth + 1, next, pa * p_next);
      }
    }
  }
};

}  // namespace

GradientEstimate estimate_gH(const Trajectory& trajectory, const PolicyParams& params, double gamma) {
  const std::size_t H = trajectory.horizon();
  if (trajectory.actions.size() != H || trajectory.rewards.size() != H) {
    throw Error("trajectory sequences have unequal lengths");
  }
  for (std::size_t t = 0; t < H; ++t) {
    if (trajectory.states[t] >= params.n_states || trajectory.actions[t] >= params.n_actions) {
      throw Error("trajectory dimension mismatch with policy parameters");
    }
  }
  const Matrix pi = policy_table(params);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(params.dim()));
  std::vector<double> discount(H);
  double gt = 1.0;
  for (std::size_t t = 0; t < H; ++t) {
    discount[t] = gt;
    gt *= gamma;
  }
  // Single backward pass over the reward-to-go.
  double to_go = 0.0;
  for (std::size_t t = H; t-- > 0;) {
    to_go += discount[t] * trajectory.rewards[t];
    if (to_go != 0.0) add_score(g, pi, params.n_actions, trajectory.states[t], trajectory.actions[t], to_go);
  }
  return GradientEstimate{std::move(g), 1, H};
}

EnumerationResult enumerate_JH(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon) {
  check_dims(spec, params);
  if (horizon == 0) throw Error("horizon must be at least 1");
  const double leaves = std::pow(static_cast<double>(spec.dim()), static_cast<double>(horizon));
  if (leaves > static_cast<double>(kEnumerationBudget)) {
    throw Error("enumeration budget exceeded: (n_states*n_actions)^H = " + std::to_string(leaves) +
                " > 1e7");
  }
  const Matrix pi = policy_table(params);
  const auto d = static_cast<Eigen::Index>(params.dim());
  Enumerator e{spec, pi, horizon, {}, std::vector<Vector>(horizon + 1, Vector::Zero(d)),
               EnumerationResult{0.0, Vector::Zero(d)}};
  e.discount.resize(horizon);
  double gt = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    e.discount[t] = gt;
    gt *= spec.gamma;
  }
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    if (spec.rho[s] == 0.0) continue;
    e.visit(0, s, spec.rho[s]);
  }
  return std::move(e.result);
}

ValueAndGradient exact_J(const MdpSpec& spec, const PolicyParams& params) {
  check_dims(spec, params);
  const Matrix pi = policy_table(params);
  const auto ns = static_cast<Eigen::Index>(spec.n_states);
  const Matrix P_pi = transition_under(spec, pi);
  Vector r_pi = Vector::Zero(ns);
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      r_pi[static_cast<Eigen::Index>(s)] += pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * spec.r(s, a);
    }
  }
  const Matrix I = Matrix::Identity(ns, ns);
  const Vector v = solve_checked(I - spec.gamma * P_pi, r_pi);
  const Vector rho = Eigen::Map<const Vector>(spec.rho.data(), ns);
  const Vector occupancy = solve_checked(I - spec.gamma * P_pi.transpose(), rho);

  ValueAndGradient out{rho.dot(v), Vector::Zero(static_cast<Eigen::Index>(spec.dim()))};
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      double q = spec.r(s, a);
      for (std::size_t next = 0; next < spec.n_states; ++next) {
        q += spec.gamma * spec.P(s, a, next) * v[static_cast<Eigen::Index>(next)];
      }
      const double w = occupancy[static_cast<Eigen::Index>(s)] *
                       pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * q;
      add_score(out.grad, pi, spec.n_actions, s, a, w);
    }
  }
  return out;
}

ValueAndGradient exact_JH(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon) {
  check_dims(spec, params);
  if (horizon == 0) throw Error("horizon must be at least 1");
  const Matrix pi = policy_table(params);
  const std::size_t ns = spec.n_states;
  const std::size_t na = spec.n_actions;

  // Forward state marginals d_t(s) = Pr(s_t = s).
  std::vector<std::vector<double>> marg(horizon, std::vector<double>(ns, 0.0));
  marg[0] = spec.rho;
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        const double w = marg[t][s] * pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
        for (std::size_t next = 0; next < ns; ++next) marg[t + 1][next] += w * spec.P(s, a, next);
      }
    }
  }
  // Backward k-step action values: Q_1 = r, Q_{k+1} = r + gamma P V_k.
  std::vector<std::vector<double>> q(horizon + 1, std::vector<double>(ns * na, 0.0));
  std::vector<double> v(ns, 0.0);
  for (std::size_t k = 1; k <= horizon; ++k) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        double val = spec.r(s, a);
        for (std::size_t next = 0; next < ns; ++next) val += spec.gamma * spec.P(s, a, next) * v[next];
        q[k][s * na + a] = val;
      }
    }
    for (std::size_t s = 0; s < ns; ++s) {
      double val = 0.0;
      for (std::size_t a = 0; a < na; ++a) val += pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * q[k][s * na + a];
      v[s] = val;
    }
  }
  ValueAndGradient out{0.0, Vector::Zero(static_cast<Eigen::Index>(spec.dim()))};
  for (std::size_t s = 0; s < ns; ++s) out.J += spec.rho[s] * v[s];
  double gt = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto& qk = q[horizon - t];
    for (std::size_t s = 0; s < ns; ++s) {
      if (marg[t][s] == 0.0) continue;
      for (std::size_t a = 0; a < na; ++a) {
        const double w = gt * marg[t][s] * pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * qk[s * na + a];
        add_score(out.grad, pi, na, s, a, w);
      }
    }
    gt *= spec.gamma;
  }
  return out;
}

double optimal_value(const MdpSpec& spec) {
  const std::size_t ns = spec.n_states;
  const std::size_t na = spec.n_actions;
  std::vector<double> v(ns, 0.0), next_v(ns, 0.0);
  std::vector<std::size_t> greedy(ns, 0);
  const double stop = 1e-10 * (1.0 - spec.gamma) / spec.gamma;
  for (int iter = 0; iter < 1'000'000; ++iter) {
    double change = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double q = spec.r(s, a);
        for (std::size_t n = 0; n < ns; ++n) q += spec.gamma * spec.P(s, a, n) * v[n];
        if (q > best) {
          best = q;
          greedy[s] = a;
        }
      }
      next_v[s] = best;
      change = std::max(change, std::abs(best - v[s]));
    }
    v.swap(next_v);
    if (change <= stop) break;
  }
  // Evaluate the greedy deterministic policy exactly.
  const auto n = static_cast<Eigen::Index>(ns);
  Matrix A = Matrix::Identity(n, n);
  Vector b(n);
  for (std::size_t s = 0; s < ns; ++s) {
    b[static_cast<Eigen::Index>(s)] = spec.r(s, greedy[s]);
    for (std::size_t nx = 0; nx < ns; ++nx) {
      A(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(nx)) -= spec.gamma * spec.P(s, greedy[s], nx);
    }
  }
  const Vector vstar = solve_checked(A, b);
  double j = 0.0;
  for (std::size_t s = 0; s < ns; ++s) j += spec.rho[s] * vstar[static_cast<Eigen::Index>(s)];
  return j;
}

ExactGradientReport exact_J_and_grad(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon) {
  const auto inf = exact_J(spec, params);
  const auto fin = exact_JH(spec, params, horizon);
  ExactGradientReport rep;
  rep.J = inf.J;
  rep.grad_J = inf.grad;
  rep.J_H = fin.J;
  rep.grad_JH = fin.grad;
  rep.J_star = optimal_value(spec);
  rep.bias_norm = (rep.grad_JH - rep.grad_J).norm();
  return rep;
}

namespace {

constexpr std::size_t kLeaf = 8;

template <typename T, typename Zero>
T pairwise(std::span<const T> items, Zero zero) {
  if (items.size() <= kLeaf) {
    T acc = zero();
    for (const auto& x : items) acc += x;
    return acc;
  }
  const std::size_t half = items.size() / 2;
  T left = pairwise(items.first(half), zero);
  left += pairwise(items.subspan(half), zero);
  return left;
}

}  // namespace

Vector pairwise_sum(std::span<const Vector> items) {
  if (items.empty()) throw Error("pairwise_sum of an empty range");
  const auto d = items.front().size();
  return pairwise(items, [d] { return Vector::Zero(d).eval(); });
}

double pairwise_sum(std::span<const double> items) {
  return pairwise(items, [] { return 0.0; });
}

MomentReport empirical_moments(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon,
                               std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  if (n_samples < 2) throw Error("empirical_moments needs at least two samples");
  const Vector exact = exact_grad_JH_bruteforce(spec, params, horizon);
  std::vector<Vector> samples(n_samples);
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RandomStream stream(seed, 0, i);
      samples[i] = estimate_gH(sample_trajectory(spec, params, horizon, stream), params, spec.gamma).vector;
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_samples));
  if (threads <= 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n_samples, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
  }

  const double n = static_cast<double>(n_samples);
  MomentReport rep;
  rep.n_samples = n_samples;
  rep.exact = exact;
  rep.mean = pairwise_sum(samples) / n;
  std::vector<Vector> sq(n_samples);
  std::vector<double> dev(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    sq[i] = (samples[i] - rep.mean).array().square().matrix();
    dev[i] = (samples[i] - exact).squaredNorm();
  }
  rep.std_error = (pairwise_sum(sq) / (n - 1.0) / n).array().sqrt().matrix();
  rep.variance = pairwise_sum(dev) / n;
  return rep;
}

}  // namespace apg
