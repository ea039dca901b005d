#include "apg/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "apg/estimator.hpp"

namespace apg {

namespace {

double horizon_term(double gamma, std::size_t H) { return 1.0 / (1.0 - gamma) + static_cast<double>(H); }

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(std::string(name) + " must be positive and finite");
}

// Ceiling that ignores relative noise below 1e-12, so 2000.0000000000016 / 0.0025
// counts as 800000 rather than 800001.
std::size_t ceil_count(double x) {
  if (!(x < 1e18)) throw Error("batch size overflows");
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12))), 1);
}

}  // namespace

SmoothnessConstants compute_constants(double M_g, double M_h, double l_2, double r_max, double gamma,
                                      std::size_t H, double Delta) {
  require_positive(M_g, "M_g");
  require_positive(M_h, "M_h");
  require_positive(l_2, "l_2");
  require_positive(r_max, "r_max");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  if (H == 0) throw Error("horizon must be at least 1");
  if (!(Delta >= 0.0)) throw Error("Delta must be nonnegative");

  SmoothnessConstants c;
  c.M_g = M_g;
  c.M_h = M_h;
  c.l_2 = l_2;
  c.r_max = r_max;
  c.gamma = gamma;
  c.Delta = Delta;
  const double q = 1.0 - gamma;
  c.L_g = r_max * (M_g * M_g + M_h) / (q * q);
  const double inner = std::max({M_h, gamma * M_g * M_g / q, l_2 / M_g, M_h * gamma / q,
                                 (M_g * (1.0 + gamma) + M_h * gamma * q) / (1.0 - gamma * gamma)});
  c.L_h = r_max * M_g * M_h / (q * q) + r_max * M_g * M_g * M_g * (1.0 + gamma) / (q * q * q) +
          r_max * M_g / q * inner;
  c.sigma2 = r_max * r_max * M_g * M_g / (q * q * q);
  return at_horizon(c, H);
}

SmoothnessConstants at_horizon(SmoothnessConstants c, std::size_t H) {
  if (H == 0) throw Error("horizon must be at least 1");
  c.H = H;
  const double q = 1.0 - c.gamma;
  const double w = horizon_term(c.gamma, H);
  c.D_g = c.M_g * c.r_max / q * std::sqrt(w);
  c.D_h = (c.M_h + c.M_g * c.M_g) * c.r_max / q * w;
  return c;
}

SmoothnessConstants softmax_constants(const MdpSpec& spec, std::size_t H, double Delta) {
  return compute_constants(SoftmaxBounds::kMg, SoftmaxBounds::kMh, SoftmaxBounds::kL2, spec.r_max,
                           spec.gamma, H, Delta);
}

double exact_delta(const MdpSpec& spec, const PolicyParams& params) {
  return optimal_value(spec) - exact_J(spec, params).J;
}

std::size_t horizon_for(double gamma, double eps, double eta, double scale) {
  const double target = eps * eta / (64.0 * scale);
  if (!(target < 1.0)) return 1;
  const double h = std::ceil(std::log(target) / std::log(gamma));
  if (!(h < static_cast<double>(kMaxHorizon))) return kMaxHorizon;
  return std::max<std::size_t>(static_cast<std::size_t>(h), 1);
}

Schedule make_schedule(const SmoothnessConstants& c, double eps, std::size_t M, std::size_t M_init) {
  require_positive(eps, "eps");
  if (M == 0 || M_init == 0) throw Error("batch sizes must be at least 1");
  Schedule s;
  s.eps = eps;
  s.M = M;
  s.M_init = M_init;
  s.eta = c.sigma2 > 0.0 ? std::min(static_cast<double>(M) * eps * eps / (64.0 * c.sigma2), 0.5) : 0.5;
  s.alpha = std::min(eps / (8.0 * c.L_g), s.eta * std::sqrt(eps) / (4.0 * std::sqrt(c.L_h)));
  s.H = horizon_for(c.gamma, eps, s.eta, std::max(c.D_g, s.alpha * c.D_h));
  return s;
}

BatchSizes choose_batches(const SmoothnessConstants& c, double eps) {
  require_positive(eps, "eps");
  const double e2 = eps * eps;
  const double sqrt_lh = std::sqrt(c.L_h);
  BatchSizes b;
  b.M_init = ceil_count(c.sigma2 / e2);
  const double num = c.sigma2 / e2 + c.sigma2 * sqrt_lh * c.Delta / std::pow(eps, 3.5);
  const double den = c.L_g * c.Delta / e2 + sqrt_lh * c.Delta / std::pow(eps, 1.5);
  b.M = den > 0.0 ? ceil_count(num / den) : b.M_init;
  return b;
}

namespace {

template <typename MakeFn>
Schedule resolve_horizon(const SmoothnessConstants& c, MakeFn make, SmoothnessConstants* resolved) {
  SmoothnessConstants cur = at_horizon(c, 1);
  Schedule s = make(cur);
  for (int iter = 0; iter < 200 && s.H != cur.H; ++iter) {
    cur = at_horizon(c, s.H);
    s = make(cur);
  }
  // The map H -> H' is monotone, so the iteration ends at the smallest fixed
  // point; guard against a two-cycle at the cap by taking the larger horizon.
  if (s.H != cur.H) {
    cur = at_horizon(c, std::max(s.H, cur.H));
    s = make(cur);
    s.H = cur.H;
  }
  if (resolved) *resolved = cur;
  return s;
}

}  // namespace

Schedule theory_schedule(const SmoothnessConstants& c, double eps, SmoothnessConstants* resolved) {
  const BatchSizes b = choose_batches(c, eps);
  return resolve_horizon(
      c, [&](const SmoothnessConstants& k) { return make_schedule(k, eps, b.M, b.M_init); }, resolved);
}

GlobalParams make_global_params(double mu_F, double eps_bias, double M_g, double gamma) {
  require_positive(mu_F, "mu_F");
  if (!(eps_bias >= 0.0)) throw Error("eps_bias must be nonnegative");
  GlobalParams g;
  g.mu_F = mu_F;
  g.eps_bias = eps_bias;
  g.mu = mu_F * mu_F / (2.0 * M_g * M_g);
  g.eps_prime = mu_F * std::sqrt(eps_bias) / (M_g * (1.0 - gamma));
  return g;
}

namespace {

struct GlobalTerms {
  double A = 0.0;  ///< iteration-count part
  double B = 0.0;  ///< noise part
};

GlobalTerms global_terms(const SmoothnessConstants& c, const GlobalParams& g, double eps) {
  const double sqrt_lh = std::sqrt(c.L_h);
  GlobalTerms t;
  t.A = c.L_g / (g.mu * eps) + sqrt_lh / (std::pow(g.mu, 0.75) * std::sqrt(eps));
  t.B = c.sigma2 / (g.mu * eps * eps) + c.sigma2 * sqrt_lh / (std::pow(g.mu, 1.75) * std::pow(eps, 2.5));
  return t;
}

}  // namespace

BatchSizes choose_batches_global(const SmoothnessConstants& c, const GlobalParams& g, double eps) {
  require_positive(eps, "eps");
  const GlobalTerms t = global_terms(c, g, eps);
  BatchSizes b;
  b.M_init = ceil_count(c.sigma2 / (g.mu * eps * eps));
  b.M = ceil_count(t.B / t.A);
  return b;
}

Schedule make_global_schedule(const SmoothnessConstants& c, const GlobalParams& g, double eps,
                              std::size_t M, std::size_t M_init) {
  require_positive(eps, "eps");
  if (M == 0 || M_init == 0) throw Error("batch sizes must be at least 1");
  Schedule s;
  s.eps = eps;
  s.M = M;
  s.M_init = M_init;
  s.eta = c.sigma2 > 0.0 ? std::min(static_cast<double>(M) * g.mu * eps * eps / (64.0 * c.sigma2), 0.5)
                         : 0.5;
  const double sigma = std::sqrt(c.sigma2);
  double alpha = std::min({std::sqrt(g.mu) * eps / (8.0 * c.L_g),
                           s.eta * std::pow(g.mu, 0.25) * std::sqrt(eps) / (4.0 * std::sqrt(c.L_h)),
                           1.0 / std::sqrt(2.0 * g.mu)});
  if (sigma > 0.0) alpha = std::min(alpha, eps * s.eta * std::sqrt(static_cast<double>(M_init)) / (8.0 * sigma));
  s.alpha = alpha;
  s.H = horizon_for(c.gamma, std::sqrt(g.mu) * eps, s.eta, std::max(c.D_g, s.alpha * c.D_h));
  return s;
}

Schedule theory_schedule_global(const SmoothnessConstants& c, const GlobalParams& g, double eps,
                                SmoothnessConstants* resolved) {
  const BatchSizes b = choose_batches_global(c, g, eps);
  return resolve_horizon(
      c, [&](const SmoothnessConstants& k) { return make_global_schedule(k, g, eps, b.M, b.M_init); },
      resolved);
}

double iteration_bound(const SmoothnessConstants& c, const Schedule& s) {
  const double eps = s.eps;
  const double sigma = std::sqrt(c.sigma2);
  const double sqrt_lh = std::sqrt(c.L_h);
  const double M = static_cast<double>(s.M);
  const double Mi = static_cast<double>(s.M_init);
  return c.L_g * c.Delta / (eps * eps) + sqrt_lh * c.Delta / std::pow(eps, 1.5) +
         sigma / (std::sqrt(Mi) * eps) + sigma * sigma * sigma / (M * std::sqrt(Mi) * eps * eps * eps) +
         c.sigma2 * sqrt_lh * c.Delta / (M * std::pow(eps, 3.5));
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kRennalaCompute:
      return "rennala-compute";
    case PredictorKind::kRennalaTotal:
      return "rennala-total";
    case PredictorKind::kMaleniaTotal:
      return "malenia-total";
    case PredictorKind::kAnyTime:
      return "any-time";
    case PredictorKind::kLowerBound:
      return "lower-bound";
    case PredictorKind::kRennalaGlobal:
      return "rennala-global";
    case PredictorKind::kMaleniaGlobal:
      return "malenia-global";
  }
  return "unknown";
}

const std::vector<PredictorKind>& all_predictor_kinds() {
  static const std::vector<PredictorKind> kinds = {
      PredictorKind::kRennalaCompute, PredictorKind::kRennalaTotal,  PredictorKind::kMaleniaTotal,
      PredictorKind::kAnyTime,        PredictorKind::kLowerBound,    PredictorKind::kRennalaGlobal,
      PredictorKind::kMaleniaGlobal};
  return kinds;
}

PredictorKind parse_predictor_kind(const std::string& name) {
  for (PredictorKind k : all_predictor_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown predictor kind '" + name + "'");
}

double harmonic_scan(std::vector<double> h, double per_agent, double shared) {
  if (h.empty()) throw Error("predictor needs at least one agent");
  std::sort(h.begin(), h.end());
  double inv_sum = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= h.size(); ++m) {
    inv_sum += 1.0 / h[m - 1];
    const double value = (per_agent * static_cast<double>(m) + shared) / inv_sum;
    best = std::min(best, value);
  }
  return best;
}

namespace {

double any_time(const Schedule& s, const TimeModel& tm, double rounds) {
  const double H = static_cast<double>(s.H);
  const auto round_cost = [&](std::size_t round, std::size_t batch) {
    return H * harmonic_scan(tm.sorted_step_times(round), 1.0, static_cast<double>(batch));
  };
  const auto T = static_cast<std::size_t>(std::ceil(rounds));
  double total = round_cost(0, s.M_init);
  if (!tm.is_table()) return total + static_cast<double>(T) * round_cost(0, s.M);
  // Rows repeat when wrapping, so cost each distinct row once.
  const std::size_t rows = tm.step_table.size();
  std::vector<double> cache(rows, -1.0);
  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t row = tm.wrap_table ? t % rows : t;
    if (row >= rows) throw Error("time table has no entry for round " + std::to_string(t));
    if (cache[row] < 0.0) cache[row] = round_cost(row, s.M);
    total += cache[row];
  }
  return total;
}

}  // namespace

double predict_time(PredictorKind kind, const SmoothnessConstants& c, const Schedule& s, const TimeModel& tm,
                    const std::optional<GlobalParams>& global) {
  if (tm.n_agents() == 0) throw Error("predictor needs at least one agent");
  const double eps = s.eps;
  const double H = static_cast<double>(s.H);
  const double kappa = tm.kappa();
  const double sqrt_lh = std::sqrt(c.L_h);
  const double A = c.L_g * c.Delta / (eps * eps) + sqrt_lh * c.Delta / std::pow(eps, 1.5);
  const double B = c.sigma2 / (eps * eps) + c.sigma2 * sqrt_lh * c.Delta / std::pow(eps, 3.5);
  const std::vector<double> h = tm.sorted_step_times(0);
  const double n = static_cast<double>(h.size());
  double mean_h = 0.0;
  for (double x : h) mean_h += x;
  mean_h /= n;

  switch (kind) {
    case PredictorKind::kRennalaCompute:
      return H * harmonic_scan(h, A, B);
    case PredictorKind::kRennalaTotal:
      return kappa * A + H * harmonic_scan(h, A, B);
    case PredictorKind::kMaleniaTotal:
      return kappa * A + H * (h.back() * A + mean_h * B / n);
    case PredictorKind::kAnyTime:
      return any_time(s, tm, A);
    case PredictorKind::kLowerBound: {
      const double comm = kappa * std::pow(c.L_g, 3.0 / 7.0) * std::pow(c.L_h, 2.0 / 7.0) * c.Delta /
                          std::pow(eps, 12.0 / 7.0);
      const double iters = std::min(c.L_g * c.Delta / (eps * eps), sqrt_lh * c.Delta / std::pow(eps, 1.5));
      return comm + H * harmonic_scan(h, 1.0, c.sigma2 / (eps * eps)) * iters;
    }
    case PredictorKind::kRennalaGlobal:
    case PredictorKind::kMaleniaGlobal: {
      if (!global) throw Error("global predictors need mu_F and eps_bias");
      const GlobalTerms t = global_terms(c, *global, eps);
      if (kind == PredictorKind::kRennalaGlobal) return kappa * t.A + H * harmonic_scan(h, t.A, t.B);
      return kappa * t.A + H * (h.back() * t.A + mean_h * t.B / n);
    }
  }
  throw Error("unknown predictor kind");
}

double rennala_round_bound(const std::vector<double>& h, std::size_t M, double kappa) {
  return 2.0 * kappa + harmonic_scan(h, 1.0, static_cast<double>(M));
}

double malenia_round_bound(const std::vector<double>& h, std::size_t M, double kappa) {
  if (h.empty()) throw Error("bound needs at least one agent");
  double mean = 0.0;
  for (double x : h) mean += x;
  const double n = static_cast<double>(h.size());
  mean /= n;
  return 2.0 * kappa + *std::max_element(h.begin(), h.end()) + mean * static_cast<double>(M) / n;
}

nlohmann::json to_json(const SmoothnessConstants& c) {
  return {{"M_g", c.M_g},       {"M_h", c.M_h}, {"l_2", c.l_2}, {"r_max", c.r_max},
          {"gamma", c.gamma},   {"H", c.H},     {"L_g", c.L_g}, {"L_h", c.L_h},
          {"sigma2", c.sigma2}, {"D_g", c.D_g}, {"D_h", c.D_h}, {"Delta", c.Delta}};
}

nlohmann::json to_json(const Schedule& s) {
  return {{"eta", s.eta}, {"alpha", s.alpha}, {"H", s.H}, {"M", s.M}, {"M_init", s.M_init}, {"eps", s.eps}};
}

nlohmann::json to_json(const GlobalParams& g) {
  return {{"mu_F", g.mu_F}, {"eps_bias", g.eps_bias}, {"mu", g.mu}, {"eps_prime", g.eps_prime}};
}

}  // namespace apg
