#include "apg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace apg {

namespace {

constexpr double kStochasticTol = 1e-12;

std::string fmt_state_action(std::size_t s, std::size_t a) {
  std::ostringstream os;
  os << "(s=" << s << ", a=" << a << ")";
  return os.str();
}

void check_state(const PolicyParams& params, std::size_t s) {
  if (s >= params.n_states) {
    throw Error("state index " + std::to_string(s) + " out of range [0, " +
                std::to_string(params.n_states) + ")");
  }
}

void check_action(const PolicyParams& params, std::size_t a) {
  if (a >= params.n_actions) {
    throw Error("action index " + std::to_string(a) + " out of range [0, " +
                std::to_string(params.n_actions) + ")");
  }
}

}  // namespace

MdpSpec validate_mdp(MdpSpec spec) {
  if (spec.n_states == 0) throw Error("n_states must be positive");
  if (spec.n_actions == 0) throw Error("n_actions must be positive");
  const std::size_t ns = spec.n_states;
  const std::size_t na = spec.n_actions;
  if (spec.transition.size() != ns * na * ns) throw Error("transition table has wrong size");
  if (spec.reward.size() != ns * na) throw Error("reward table has wrong size");
  if (spec.rho.size() != ns) throw Error("rho has wrong size");
  if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  if (!(spec.r_max > 0.0) || !std::isfinite(spec.r_max)) throw Error("r_max must be positive");

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double sum = 0.0;
      for (std::size_t next = 0; next < ns; ++next) {
        const double p = spec.P(s, a, next);
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw Error("negative transition probability at " + fmt_state_action(s, a));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kStochasticTol) {
        throw Error("non-stochastic row at " + fmt_state_action(s, a));
      }
      const double r = spec.r(s, a);
      if (!std::isfinite(r) || std::abs(r) > spec.r_max) {
        throw Error("reward exceeds r_max at " + fmt_state_action(s, a));
      }
    }
  }
  double rho_sum = 0.0;
  for (double p : spec.rho) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error("rho has a negative entry");
    rho_sum += p;
  }
  if (std::abs(rho_sum - 1.0) > kStochasticTol) throw Error("rho does not sum to 1");
  return spec;
}

PolicyParams PolicyParams::zeros(std::size_t n_states, std::size_t n_actions) {
  return PolicyParams{n_states, n_actions, Vector::Zero(static_cast<Eigen::Index>(n_states * n_actions))};
}

PolicyParams PolicyParams::with_theta(Vector values) const {
  if (static_cast<std::size_t>(values.size()) != dim()) {
    throw Error("theta length " + std::to_string(values.size()) + " does not match " +
                std::to_string(dim()));
  }
  return PolicyParams{n_states, n_actions, std::move(values)};
}

Vector policy_probs(const PolicyParams& params, std::size_t s) {
  check_state(params, s);
  const auto na = static_cast<Eigen::Index>(params.n_actions);
  const auto block = params.theta.segment(static_cast<Eigen::Index>(params.index(s, 0)), na);
  const double shift = block.maxCoeff();
  Vector p = (block.array() - shift).exp().matrix();
  p /= p.sum();
  return p;
}

Vector grad_log_pi(const PolicyParams& params, std::size_t s, std::size_t a) {
  check_state(params, s);
  check_action(params, a);
  const Vector pi = policy_probs(params, s);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(params.dim()));
  const auto base = static_cast<Eigen::Index>(params.index(s, 0));
  for (Eigen::Index b = 0; b < pi.size(); ++b) g[base + b] = -pi[b];
  g[base + static_cast<Eigen::Index>(a)] += 1.0;
  return g;
}

Matrix hessian_log_pi(const PolicyParams& params, std::size_t s, std::size_t a) {
  check_state(params, s);
  check_action(params, a);
  const Vector pi = policy_probs(params, s);
  const auto d = static_cast<Eigen::Index>(params.dim());
  Matrix h = Matrix::Zero(d, d);
  const auto base = static_cast<Eigen::Index>(params.index(s, 0));
  const auto na = pi.size();
  h.block(base, base, na, na) = pi * pi.transpose();
  h.block(base, base, na, na).diagonal() -= pi;
  return h;
}

Trajectory sample_trajectory(const MdpSpec& spec, const PolicyParams& params, std::size_t horizon,
                             RandomStream& stream) {
  if (horizon == 0) throw Error("horizon must be at least 1");
  if (params.n_states != spec.n_states || params.n_actions != spec.n_actions) {
    throw Error("policy dimensions do not match the MDP");
  }
  // Per-state action distributions are computed once per trajectory.
  std::vector<double> pi_table(spec.dim());
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    const Vector p = policy_probs(params, s);
    std::copy(p.data(), p.data() + p.size(), pi_table.begin() + static_cast<std::ptrdiff_t>(s * spec.n_actions));
  }

  Trajectory traj;
  traj.states.reserve(horizon);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);
  std::size_t s = stream.categorical(spec.rho);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t a =
        stream.categorical(std::span<const double>(pi_table).subspan(s * spec.n_actions, spec.n_actions));
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.rewards.push_back(spec.r(s, a));
    if (t + 1 < horizon) {
      s = stream.categorical(
          std::span<const double>(spec.transition).subspan((s * spec.n_actions + a) * spec.n_states, spec.n_states));
    }
  }
  return traj;
}

nlohmann::json mdp_to_json(const MdpSpec& spec) {
  nlohmann::json transition = nlohmann::json::array();
  nlohmann::json reward = nlohmann::json::array();
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    nlohmann::json t_s = nlohmann::json::array();
    nlohmann::json r_s = nlohmann::json::array();
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t next = 0; next < spec.n_states; ++next) row.push_back(spec.P(s, a, next));
      t_s.push_back(std::move(row));
      r_s.push_back(spec.r(s, a));
    }
    transition.push_back(std::move(t_s));
    reward.push_back(std::move(r_s));
  }
  return nlohmann::json{{"n_states", spec.n_states}, {"n_actions", spec.n_actions},
                        {"transition", transition},  {"reward", reward},
                        {"rho", spec.rho},           {"gamma", spec.gamma},
                        {"r_max", spec.r_max}};
}

MdpSpec mdp_from_json(const nlohmann::json& doc) {
  static const char* kFields[] = {"n_states", "n_actions", "transition", "reward", "rho", "gamma", "r_max"};
  if (!doc.is_object()) throw Error("MDP document must be a JSON object");
  for (const char* f : kFields) {
    if (!doc.contains(f)) throw Error(std::string("MDP document is missing field '") + f + "'");
  }
  for (const auto& [key, _] : doc.items()) {
    if (std::find_if(std::begin(kFields), std::end(kFields), [&](const char* f) { return key == f; }) ==
        std::end(kFields)) {
      throw Error("MDP document has unknown field '" + key + "'");
    }
  }
  MdpSpec spec;
  try {
    spec.n_states = doc.at("n_states").get<std::size_t>();
    spec.n_actions = doc.at("n_actions").get<std::size_t>();
    spec.gamma = doc.at("gamma").get<double>();
    spec.r_max = doc.at("r_max").get<double>();
    spec.rho = doc.at("rho").get<std::vector<double>>();
    const auto& tr = doc.at("transition");
    const auto& rw = doc.at("reward");
    if (tr.size() != spec.n_states || rw.size() != spec.n_states) {
      throw Error("transition/reward outer length must equal n_states");
    }
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      if (tr[s].size() != spec.n_actions || rw[s].size() != spec.n_actions) {
        throw Error("transition/reward rows must have n_actions entries");
      }
      for (std::size_t a = 0; a < spec.n_actions; ++a) {
        const auto row = tr[s][a].get<std::vector<double>>();
        if (row.size() != spec.n_states) throw Error("transition row must have n_states entries");
        spec.transition.insert(spec.transition.end(), row.begin(), row.end());
        spec.reward.push_back(rw[s][a].get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed MDP document: ") + e.what());
  }
  return validate_mdp(std::move(spec));
}

MdpSpec load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open MDP file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse MDP file '" + path + "': " + e.what());
  }
  return mdp_from_json(doc);
}

MdpSpec benchmark_mdp() {
  // Mirrors core/data/benchmark_mdp.json (generator: tests/oracles/make_benchmark.py, seed 20240).
  MdpSpec spec;
  spec.n_states = 2;
  spec.n_actions = 2;
  spec.transition = {0.540359, 0.459641, 0.423363, 0.576637,   // s = 0
                     0.180326, 0.819674, 0.896537, 0.103463};  // s = 1
  spec.reward = {0.736752, -0.96451, 0.720964, 0.82594};
  spec.rho = {0.5, 0.5};
  spec.gamma = 0.9;
  spec.r_max = 1.0;
  return validate_mdp(std::move(spec));
}

MdpSpec permute_states(const MdpSpec& spec, const std::vector<std::size_t>& perm) {
  if (perm.size() != spec.n_states) throw Error("permutation length must equal n_states");
  std::vector<bool> seen(spec.n_states, false);
  for (std::size_t p : perm) {
    if (p >= spec.n_states || seen[p]) throw Error("not a permutation of the state set");
    seen[p] = true;
  }
  MdpSpec out = spec;
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    out.rho[s] = spec.rho[perm[s]];
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      out.reward[s * spec.n_actions + a] = spec.r(perm[s], a);
      for (std::size_t next = 0; next < spec.n_states; ++next) {
        out.transition[(s * spec.n_actions + a) * spec.n_states + next] = spec.P(perm[s], a, perm[next]);
      }
    }
  }
  return out;
}

MdpSpec zero_reward(MdpSpec spec) {
  std::fill(spec.reward.begin(), spec.reward.end(), 0.0);
  return spec;
}

}  // namespace apg
