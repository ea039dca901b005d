#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "apg/constants.hpp"
#include "apg/estimator.hpp"
#include "apg/rng.hpp"
#include "test_util.hpp"

namespace apg {
namespace {

SmoothnessConstants unit_softmax(std::size_t H = 10) {
  return compute_constants(std::sqrt(2.0), 1.0, 2.0, 1.0, 0.9, H, 1.0);
}

TEST(Constants, DirectSubstitution) {
  const SmoothnessConstants c = unit_softmax(10);
  EXPECT_NEAR(c.L_g, 300.0, 1e-9);
  EXPECT_NEAR(c.sigma2, 2000.0, 1e-9);
  EXPECT_NEAR(c.D_g, std::sqrt(2.0) / 0.1 * std::sqrt(20.0), 1e-9);
  EXPECT_NEAR(c.D_g, 63.246, 1e-3);
  EXPECT_NEAR(c.D_h, (1.0 + 2.0) / 0.1 * 20.0, 1e-9);
}

TEST(Constants, MatchIndependentEvaluation) {
  const auto& g = testing::goldens().at("batches_eps0.5");
  const SmoothnessConstants c = unit_softmax();
  EXPECT_NEAR(c.L_g, g.at("L_g").get<double>(), 1e-9);
  EXPECT_NEAR(c.L_h, g.at("L_h").get<double>(), 1e-9);
  EXPECT_NEAR(c.sigma2, g.at("sigma2").get<double>(), 1e-9);
}

TEST(Constants, SoftmaxUsesVerifiedBounds) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 1.0);
  EXPECT_EQ(c.M_g, SoftmaxBounds::kMg);
  EXPECT_EQ(c.M_h, SoftmaxBounds::kMh);
  EXPECT_EQ(c.l_2, SoftmaxBounds::kL2);
  EXPECT_NEAR(c.L_g, 300.0, 1e-9);
}

TEST(Constants, RejectsBadInputs) {
  EXPECT_THROW(compute_constants(1.0, 1.0, 1.0, 1.0, 1.0, 5, 1.0), Error);
  EXPECT_THROW(compute_constants(1.0, 1.0, 1.0, 1.0, 0.9, 0, 1.0), Error);
  EXPECT_THROW(compute_constants(1.0, 1.0, 1.0, 1.0, 0.9, 5, -1.0), Error);
  EXPECT_THROW(compute_constants(-1.0, 1.0, 1.0, 1.0, 0.9, 5, 1.0), Error);
}

TEST(Constants, AtHorizonOnlyChangesBiasTerms) {
  const SmoothnessConstants a = unit_softmax(10);
  const SmoothnessConstants b = at_horizon(a, 30);
  EXPECT_EQ(a.L_g, b.L_g);
  EXPECT_EQ(a.L_h, b.L_h);
  EXPECT_EQ(a.sigma2, b.sigma2);
  EXPECT_EQ(b.H, 30u);
  EXPECT_NEAR(b.D_g, std::sqrt(2.0) / 0.1 * std::sqrt(40.0), 1e-9);
}

TEST(Constants, ExactDeltaOnBenchmark) {
  const MdpSpec m = benchmark_mdp();
  EXPECT_NEAR(exact_delta(m, PolicyParams::zeros(m)), 7.680678123023854 - 3.2207627995963892, 1e-9);
}

// Truncation bias never exceeds D_g gamma^H.
TEST(Constants, TruncationBiasWithinBound) {
  const MdpSpec m = benchmark_mdp();
  PolicyParams p = PolicyParams::zeros(m);
  p.theta << 0.5, -0.5, 1.0, -2.0;
  const Vector full = exact_J(m, p).grad;
  for (std::size_t H = 1; H <= 50; ++H) {
    const double bias = (exact_JH(m, p, H).grad - full).norm();
    const SmoothnessConstants c = softmax_constants(m, H, 1.0);
    EXPECT_LE(bias, c.D_g * std::pow(m.gamma, static_cast<double>(H))) << "H=" << H;
  }
}

TEST(Schedule, EtaFormula) {
  SmoothnessConstants c = unit_softmax();
  c.sigma2 = 4.0;
  EXPECT_DOUBLE_EQ(make_schedule(c, 1.0, 8, 1).eta, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(make_schedule(c, 1.0, 32 * 4, 1).eta, 0.5);
  EXPECT_DOUBLE_EQ(make_schedule(c, 1.0, 10'000, 1).eta, 0.5);
}

TEST(Schedule, AlphaIsMinOfTwoTerms) {
  const SmoothnessConstants c = unit_softmax();
  const Schedule s = make_schedule(c, 0.5, 1221, 8000);
  const double first = 0.5 / (8.0 * c.L_g);
  const double second = s.eta * std::sqrt(0.5) / (4.0 * std::sqrt(c.L_h));
  EXPECT_DOUBLE_EQ(s.alpha, std::min(first, second));
  EXPECT_EQ(s.M, 1221u);
  EXPECT_EQ(s.M_init, 8000u);
}

TEST(Schedule, HorizonFromLogarithm) {
  EXPECT_EQ(horizon_for(0.9, 0.1, 0.5, 10.0), 90u);
  // gamma^H decreasing: the returned H is the first one meeting the bound
  const std::size_t H = horizon_for(0.9, 0.1, 0.5, 10.0);
  const double rhs = 0.1 * 0.5 / 640.0;
  EXPECT_LE(std::pow(0.9, static_cast<double>(H)), rhs);
  EXPECT_GT(std::pow(0.9, static_cast<double>(H - 1)), rhs);
}

TEST(Schedule, HorizonCappedAndAtLeastOne) {
  EXPECT_EQ(horizon_for(0.9, 1e6, 0.5, 1e-6), 1u);
  EXPECT_EQ(horizon_for(1.0 - 1e-9, 1e-3, 0.5, 100.0), kMaxHorizon);
}

TEST(Schedule, TheoryScheduleIsFixedPoint) {
  const SmoothnessConstants c = unit_softmax(1);
  SmoothnessConstants resolved;
  const Schedule s = theory_schedule(c, 0.5, &resolved);
  EXPECT_EQ(resolved.H, s.H);
  const double scale = std::max(resolved.D_g, s.alpha * resolved.D_h);
  EXPECT_EQ(horizon_for(c.gamma, 0.5, s.eta, scale), s.H);
}

TEST(Batches, NoiselessAndSmallRatio) {
  SmoothnessConstants c = unit_softmax();
  c.sigma2 = 0.0;
  BatchSizes b = choose_batches(c, 0.5);
  EXPECT_EQ(b.M, 1u);
  EXPECT_EQ(b.M_init, 1u);
  c.sigma2 = 4.0;
  EXPECT_EQ(choose_batches(c, 2.0).M_init, 1u);
}

TEST(Batches, MatchIndependentEvaluation) {
  const auto& g = testing::goldens().at("batches_eps0.5");
  const BatchSizes b = choose_batches(unit_softmax(), 0.5);
  EXPECT_EQ(b.M, g.at("M").get<std::size_t>());
  EXPECT_EQ(b.M_init, g.at("M_init").get<std::size_t>());
  EXPECT_EQ(b.M, 1221u);
  EXPECT_EQ(b.M_init, 8000u);
}

TEST(Global, ParamsAndBatchesArePositive) {
  const GlobalParams g = make_global_params(0.5, 0.01, std::sqrt(2.0), 0.9);
  EXPECT_NEAR(g.mu, 0.25 / 4.0, 1e-15);
  EXPECT_NEAR(g.eps_prime, 0.5 * 0.1 / (std::sqrt(2.0) * 0.1), 1e-12);
  const SmoothnessConstants c = unit_softmax();
  const BatchSizes b = choose_batches_global(c, g, 0.5);
  EXPECT_GE(b.M, 1u);
  EXPECT_GE(b.M_init, 1u);
  const Schedule s = theory_schedule_global(c, g, 0.5);
  EXPECT_GT(s.alpha, 0.0);
  EXPECT_LE(s.alpha, 1.0 / std::sqrt(2.0 * g.mu));
  EXPECT_THROW(make_global_params(0.5, -1.0, std::sqrt(2.0), 0.9), Error);
}

TEST(Predictors, HarmonicScanExamples) {
  EXPECT_DOUBLE_EQ(harmonic_scan({1.0, 2.0}, 1.0, 4.0), 4.0);
  EXPECT_DOUBLE_EQ(harmonic_scan({2.0, 1.0}, 1.0, 4.0), 4.0);  // order-insensitive
  EXPECT_DOUBLE_EQ(harmonic_scan({3.0}, 2.0, 5.0), 21.0);
  EXPECT_THROW(harmonic_scan({}, 1.0, 1.0), Error);
}

TEST(Predictors, HarmonicScanMatchesBruteForce) {
  RandomStream rng(5, 0, 0, StreamDomain::kSweep);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(0, 7);
    std::vector<double> h(n);
    for (double& x : h) x = rng.uniform(0.1, 10.0);
    const double a = rng.uniform(0.0, 3.0);
    const double b = rng.uniform(0.0, 50.0);
    std::vector<double> sorted = h;
    std::sort(sorted.begin(), sorted.end());
    double best = INFINITY;
    double inv = 0.0;
    for (std::size_t m = 1; m <= n; ++m) {
      inv += 1.0 / sorted[m - 1];
      best = std::min(best, (a * static_cast<double>(m) + b) / inv);
    }
    EXPECT_NEAR(harmonic_scan(h, a, b), best, 1e-12 * best);
  }
}

TEST(Predictors, RoundBoundExamples) {
  EXPECT_DOUBLE_EQ(malenia_round_bound({1.0, 3.0}, 4, 0.0), 7.0);
  EXPECT_DOUBLE_EQ(malenia_round_bound({1.0, 3.0}, 4, 1.5), 10.0);
  EXPECT_DOUBLE_EQ(rennala_round_bound({1.0, 2.0}, 4, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(rennala_round_bound({1.0, 2.0}, 4, 5.0), 14.0);
}

TEST(Predictors, SingleAgentCollapsesMin) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 2.0);
  const Schedule s{0.5, 0.01, 10, 5, 5, 0.5};
  const TimeModel tm = TimeModel::from_steps({0.3});
  const double eps = s.eps;
  const double A = c.L_g * c.Delta / (eps * eps) + std::sqrt(c.L_h) * c.Delta / std::pow(eps, 1.5);
  const double B = c.sigma2 / (eps * eps) + c.sigma2 * std::sqrt(c.L_h) * c.Delta / std::pow(eps, 3.5);
  const double expected = 0.3 * 10.0 * (A + B);
  EXPECT_NEAR(predict_time(PredictorKind::kRennalaCompute, c, s, tm), expected, 1e-9 * expected);
}

TEST(Predictors, TotalAddsCommunication) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 2.0);
  const Schedule s{0.5, 0.01, 10, 5, 5, 0.5};
  const TimeModel quiet = TimeModel::from_steps({1.0, 2.0, 3.0}, 0.0);
  const TimeModel chatty = TimeModel::from_steps({1.0, 2.0, 3.0}, 4.0);
  EXPECT_DOUBLE_EQ(predict_time(PredictorKind::kRennalaTotal, c, s, quiet),
                   predict_time(PredictorKind::kRennalaCompute, c, s, quiet));
  EXPECT_GT(predict_time(PredictorKind::kRennalaTotal, c, s, chatty),
            predict_time(PredictorKind::kRennalaTotal, c, s, quiet));
  EXPECT_DOUBLE_EQ(predict_time(PredictorKind::kRennalaCompute, c, s, chatty),
                   predict_time(PredictorKind::kRennalaCompute, c, s, quiet));
}

TEST(Predictors, MonotoneUnderAppendedSlowAgent) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 2.0);
  const Schedule s{0.5, 0.01, 10, 5, 5, 0.1};
  RandomStream rng(9, 0, 0, StreamDomain::kSweep);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> h(1 + rng.uniform_int(0, 6));
    for (double& x : h) x = rng.uniform(0.1, 10.0);
    const double before = predict_time(PredictorKind::kRennalaCompute, c, s, TimeModel::from_steps(h));
    h.push_back(*std::max_element(h.begin(), h.end()) * rng.uniform(1.0, 1e3));
    const double after = predict_time(PredictorKind::kRennalaCompute, c, s, TimeModel::from_steps(h));
    EXPECT_LE(after, before * (1.0 + 1e-12));
  }
}

TEST(Predictors, StragglerBoundedByReducedSet) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 2.0);
  const Schedule s{0.5, 0.01, 10, 5, 5, 0.1};
  const std::vector<double> head{0.5, 1.0, 2.0};
  std::vector<double> all = head;
  all.push_back(3.0);
  const double base = predict_time(PredictorKind::kRennalaCompute, c, s, TimeModel::from_steps(all));
  all.back() *= 1e6;
  const double slowed = predict_time(PredictorKind::kRennalaCompute, c, s, TimeModel::from_steps(all));
  const double reduced = predict_time(PredictorKind::kRennalaCompute, c, s, TimeModel::from_steps(head));
  EXPECT_LE(slowed - base, reduced);
  EXPECT_DOUBLE_EQ(slowed, reduced);
}

TEST(Predictors, LowerBoundBelowRennalaTotal) {
  RandomStream rng(13, 0, 0, StreamDomain::kSweep);
  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = rng.uniform(0.5, 0.99);
    const SmoothnessConstants c =
        compute_constants(std::sqrt(2.0), 1.0, 2.0, rng.uniform(0.1, 5.0), gamma, 10, rng.uniform(0.01, 10.0));
    const Schedule s{0.5, 0.01, 1 + rng.uniform_int(0, 50), 5, 5, rng.uniform(0.01, 1.0)};
    std::vector<double> h(1 + rng.uniform_int(0, 7));
    for (double& x : h) x = rng.uniform(0.01, 10.0);
    const TimeModel tm = TimeModel::from_steps(h, rng.uniform(0.0, 5.0));
    EXPECT_LE(predict_time(PredictorKind::kLowerBound, c, s, tm),
              predict_time(PredictorKind::kRennalaTotal, c, s, tm));
  }
}

TEST(Predictors, GlobalKindsNeedParams) {
  const SmoothnessConstants c = unit_softmax();
  const Schedule s{0.5, 0.01, 10, 5, 5, 0.5};
  const TimeModel tm = TimeModel::from_steps({1.0, 2.0});
  EXPECT_THROW(predict_time(PredictorKind::kRennalaGlobal, c, s, tm), Error);
  const GlobalParams g = make_global_params(0.5, 0.01, std::sqrt(2.0), 0.9);
  EXPECT_GT(predict_time(PredictorKind::kRennalaGlobal, c, s, tm, g), 0.0);
  EXPECT_GT(predict_time(PredictorKind::kMaleniaGlobal, c, s, tm, g), 0.0);
}

TEST(Predictors, AnyTimeUsesTableRows) {
  const SmoothnessConstants c = unit_softmax();
  const Schedule s{0.5, 0.01, 2, 3, 3, 5.0};
  TimeModel tm;
  tm.step_table = {{1.0, 1.0}};
  tm.wrap_table = true;
  TimeModel fixed = TimeModel::from_steps({1.0, 1.0});
  EXPECT_NEAR(predict_time(PredictorKind::kAnyTime, c, s, tm), predict_time(PredictorKind::kAnyTime, c, s, fixed),
              1e-9);
  tm.wrap_table = false;
  EXPECT_THROW(predict_time(PredictorKind::kAnyTime, c, s, tm), Error);
}

TEST(Predictors, NamesRoundTrip) {
  for (PredictorKind k : all_predictor_kinds()) EXPECT_EQ(parse_predictor_kind(to_string(k)), k);
  EXPECT_THROW(parse_predictor_kind("fastest"), Error);
}

TEST(IterationBound, PositiveAndDecreasingInEps) {
  const SmoothnessConstants c = softmax_constants(benchmark_mdp(), 10, 4.46);
  Schedule coarse = theory_schedule(c, 0.5);
  Schedule fine = theory_schedule(c, 0.05);
  EXPECT_GT(iteration_bound(c, fine), iteration_bound(c, coarse));
  EXPECT_GT(iteration_bound(c, coarse), 0.0);
}

TEST(Serialization, ScheduleJsonHasAllFields) {
  const nlohmann::json j = to_json(Schedule{0.25, 0.01, 7, 3, 4, 0.5});
  for (const char* k : {"eta", "alpha", "H", "M", "M_init", "eps"}) EXPECT_TRUE(j.contains(k)) << k;
}

}  // namespace
}  // namespace apg
