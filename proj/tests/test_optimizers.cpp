#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pathlens/optimizers.hpp"

using namespace pathlens;

namespace {

oracles::Moments moments_of(const SufficientStats& s) { return {s.gram(), s.cross(), s.target_second_moment()}; }

LinearModel zero_of(const SufficientStats& s) { return LinearModel::zeros(s.feature_names()); }

}  // namespace

TEST(Optimizers, GreedyToyCosts) {
  const SufficientStats s = fixtures::toy();
  const CoordinatePath p = greedy_path(s, zero_of(s), 2);
  const CostSequence c = cost_sequence(s, p);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(c.at(0), 0.42, 0.01);
  EXPECT_NEAR(c.at(1), 0.39, 0.01);
  EXPECT_EQ(p.steps()[0].feature, 0);
  EXPECT_EQ(p.steps()[1].feature, 1);
}

TEST(Optimizers, GreedyZeroStepsIsEmpty) {
  const SufficientStats s = fixtures::toy();
  EXPECT_TRUE(greedy_path(s, zero_of(s), 0).empty());
}

TEST(Optimizers, ExactToyBeatsHandPaths) {
  const SufficientStats s = fixtures::toy();
  OptimizerConfig cfg;
  cfg.K = 2;
  const PathResult r = exact_path(s, zero_of(s), cfg);
  EXPECT_LE(r.objective, 1.13 + 0.25 + 1e-9);
  EXPECT_LE(r.objective, 0.42 + 0.39 + 1e-9);
  EXPECT_NEAR(r.objective, weighted_loss(s, r.path, cfg.schedule), 1e-10);
  // The free optimum trades some final accuracy for a better first step.
  const double expect = oracles::brute_force_optimum(moments_of(s), Eigen::VectorXd::Zero(2), 2, Eigen::VectorXd::Ones(2));
  EXPECT_NEAR(r.objective, expect, 1e-9);
  EXPECT_GT(cost(s, r.path.final_model()), cost(s, ols(s)) + 0.05);
}

TEST(Optimizers, ExactMatchesBruteForceOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + trial % 3;
    const int K = 1 + trial % 4;
    const SufficientStats s = fixtures::random_stats(rng, 30, d, 0.6);
    OptimizerConfig cfg;
    cfg.K = static_cast<std::size_t>(K);
    const double gamma = trial % 2 ? 0.5 : 2.0;
    cfg.schedule = WeightSchedule::geometric(gamma);
    const PathResult r = exact_path(s, zero_of(s), cfg);
    const double expect =
        oracles::brute_force_optimum(moments_of(s), Eigen::VectorXd::Zero(d), K, cfg.schedule.weights(cfg.K));
    EXPECT_NEAR(r.objective, expect, 1e-9 * std::max(1.0, expect)) << "trial " << trial;
  }
}

TEST(Optimizers, ExactRespectsBudget) {
  std::mt19937_64 rng(1);
  const SufficientStats s = fixtures::random_stats(rng, 30, 5);
  OptimizerConfig cfg;
  cfg.K = 6;
  cfg.enumeration_budget = 1000;
  EXPECT_THROW(exact_path(s, zero_of(s), cfg), BudgetExceeded);
}

TEST(Optimizers, LocalImprovementNeverWorsensAndIsDeterministic) {
  std::mt19937_64 rng(9);
  const SufficientStats s = fixtures::random_stats(rng, 60, 5, 0.5);
  OptimizerConfig cfg;
  cfg.K = 7;
  cfg.q = 2;
  cfg.T = 30;
  cfg.seed = 7;
  const PathResult a = local_improvement(s, zero_of(s), cfg);
  const PathResult b = local_improvement(s, zero_of(s), cfg);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.objective, b.objective);
  ASSERT_EQ(a.trace.size(), cfg.T + 1);
  for (std::size_t t = 1; t < a.trace.size(); ++t) EXPECT_LE(a.trace[t], a.trace[t - 1]);
  const double greedy_loss = weighted_loss(s, greedy_path(s, zero_of(s), cfg.K), cfg.schedule);
  EXPECT_LE(a.objective, greedy_loss + 1e-12);
  EXPECT_NEAR(a.objective, weighted_loss(s, a.path, cfg.schedule), 1e-9);
  const PathResult exact = exact_path(s, zero_of(s), cfg);
  EXPECT_GE(a.objective, exact.objective - 1e-9);
}

TEST(Optimizers, LocalWithFullBatchIsExact) {
  std::mt19937_64 rng(12);
  const SufficientStats s = fixtures::random_stats(rng, 40, 3);
  OptimizerConfig cfg;
  cfg.K = 3;
  cfg.q = 3;
  cfg.T = 1;
  const PathResult local = local_improvement(s, zero_of(s), IndexVector{0, 0, 0}, cfg);
  EXPECT_NEAR(local.objective, exact_path(s, zero_of(s), cfg).objective, 1e-10);
}

TEST(Optimizers, LocalRejectsBadStart) {
  const SufficientStats s = fixtures::toy();
  OptimizerConfig cfg;
  cfg.K = 2;
  EXPECT_THROW(local_improvement(s, zero_of(s), IndexVector{0}, cfg), InvalidInput);
  EXPECT_THROW(local_improvement(s, zero_of(s), IndexVector{0, 5}, cfg), InvalidInput);
}

TEST(Optimizers, DirectPathInstallsLeastSquaresValues) {
  const SufficientStats s = fixtures::toy();
  const CoordinatePath p = direct_path(s, zero_of(s), 2);
  ASSERT_EQ(p.length(), 2u);
  EXPECT_EQ(p.final_model().coefficients(), ols(s).coefficients());
  EXPECT_EQ(p.steps()[0].feature, 0);  // 1.13 beats 4.74
  EXPECT_THROW(direct_path(s, zero_of(s), 3), InvalidInput);
}

TEST(Optimizers, UnitModeTakesIntegerSteps) {
  const SufficientStats s = fixtures::toy();
  OptimizerConfig cfg;
  cfg.K = 3;
  cfg.step_mode = StepMode::unit;
  const PathResult r = exact_path(s, zero_of(s), cfg);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
  for (const auto& st : r.path.steps()) {
    EXPECT_NEAR(std::abs(st.value - beta(st.feature)), 1.0, 1e-12);
    beta(st.feature) = st.value;
  }
  // Every +-1 path of length 3 by brute force.
  double best = INFINITY;
  oracles::for_each_index_vector(4, 3, [&](const std::vector<int>& mv) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
    double loss = 0.0;
    for (int m : mv) {
      b(m / 2) += m % 2 ? -1.0 : 1.0;
      loss += cost(s, b);
    }
    best = std::min(best, loss);
  });
  EXPECT_NEAR(r.objective, best, 1e-12);
  const CoordinatePath g = greedy_path(s, zero_of(s), 3, StepMode::unit);
  EXPECT_GE(weighted_loss(s, g, cfg.schedule), r.objective - 1e-12);
}

TEST(Optimizers, BestExplanationToy) {
  const SufficientStats s = fixtures::toy();
  const LinearModel target = ols(s);
  const PathResult r = best_explanation(s, zero_of(s), target, WeightSchedule::geometric(1.0), 3);
  EXPECT_LE(r.objective, 1.28);
  EXPECT_EQ(r.path.final_model().coefficients(), target.coefficients());
  EXPECT_THROW(best_explanation(s, zero_of(s), target, WeightSchedule::geometric(1.0), 1), Infeasible);
  const PathResult same = best_explanation(s, target, target, WeightSchedule::geometric(1.0), 3);
  EXPECT_TRUE(same.path.empty());
  EXPECT_EQ(same.objective, 0.0);
}

TEST(Optimizers, BestExplanationFromNonzeroBase) {
  const SufficientStats s = fixtures::toy();
  LinearModel base = zero_of(s);
  base.set(0, 1.274);
  const LinearModel target = ols(s);
  const PathResult r = best_explanation(s, base, target, WeightSchedule::geometric(1.0), 3);
  EXPECT_EQ(r.path.base(), base);
  EXPECT_EQ(r.path.final_model().coefficients(), target.coefficients());
  // Two steps are always enough, and no path here can beat 2 * OLS cost.
  EXPECT_GE(r.objective, 2.0 * cost(s, target) - 1e-9);
}

TEST(Optimizers, EndpointConstraintInExactSearch) {
  std::mt19937_64 rng(3);
  const SufficientStats s = fixtures::random_stats(rng, 40, 3);
  OptimizerConfig cfg;
  cfg.K = 4;
  cfg.endpoint = ols(s);
  const PathResult r = exact_path(s, zero_of(s), cfg);
  EXPECT_EQ(r.path.final_model().coefficients(), ols(s).coefficients());
  OptimizerConfig free = cfg;
  free.endpoint.reset();
  EXPECT_GE(r.objective, exact_path(s, zero_of(s), free).objective - 1e-12);
}
