#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pathlens/inner_solver.hpp"

using namespace pathlens;

namespace {

oracles::Moments moments_of(const SufficientStats& s) { return {s.gram(), s.cross(), s.target_second_moment()}; }

std::vector<int> as_int(const IndexVector& iv) { return {iv.begin(), iv.end()}; }

IndexVector random_iv(std::mt19937_64& rng, int d, int K) {
  std::uniform_int_distribution<int> pick(0, d - 1);
  IndexVector iv(static_cast<std::size_t>(K));
  for (auto& i : iv) i = pick(rng);
  return iv;
}

// Endpoint-constrained optimum: the last step on each coordinate is implied
// by the others, the remaining steps are free.
double constrained_oracle(const oracles::Moments& m, const Eigen::VectorXd& beta0, const Eigen::VectorXd& target,
                          const std::vector<int>& iv, const Eigen::VectorXd& alpha) {
  const int K = static_cast<int>(iv.size());
  std::vector<int> free_pos;
  for (int k = 0; k < K; ++k) {
    bool later = false;
    for (int l = k + 1; l < K; ++l) later = later || iv[static_cast<std::size_t>(l)] == iv[static_cast<std::size_t>(k)];
    if (later) free_pos.push_back(k);
  }
  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(beta0.size());
    for (std::size_t f = 0; f < free_pos.size(); ++f) {
      delta(free_pos[f]) = z(static_cast<Eigen::Index>(f));
      sum(iv[static_cast<std::size_t>(free_pos[f])]) += z(static_cast<Eigen::Index>(f));
    }
    for (int k = 0; k < K; ++k) {
      if (std::find(free_pos.begin(), free_pos.end(), k) == free_pos.end()) {
        const int c = iv[static_cast<std::size_t>(k)];
        delta(k) = target(c) - beta0(c) - sum(c);
      }
    }
    return delta;
  };
  auto f = [&](const Eigen::VectorXd& z) { return oracles::path_loss(m, beta0, iv, expand(z), alpha); };
  if (free_pos.empty()) return f(Eigen::VectorXd());
  const Eigen::VectorXd z = oracles::minimize_cg(f, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_pos.size())));
  return f(z);
}

}  // namespace

TEST(InnerSolver, FreeSolutionMatchesPseudoinverseOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + trial % 4;
    const int K = 1 + trial % 6;
    const SufficientStats s = fixtures::random_stats(rng, 30, d, 0.5);
    const LinearModel base = LinearModel::zeros(s.feature_names());
    const IndexVector iv = random_iv(rng, d, K);
    const Eigen::VectorXd alpha = fixtures::random_weights(rng, K);
    const InnerSolution sol = solve_free(s, base, iv, alpha);
    const double expect = oracles::min_loss_pinv(moments_of(s), base.coefficients(), as_int(iv), alpha);
    EXPECT_NEAR(sol.objective, expect, 1e-9 * std::max(1.0, expect)) << "trial " << trial;
    EXPECT_NEAR(free_objective(s, base, iv, alpha), expect, 1e-9 * std::max(1.0, expect)) << "trial " << trial;
  }
}

TEST(InnerSolver, NormalSystemReproducesObjective) {
  std::mt19937_64 rng(4);
  const SufficientStats s = fixtures::random_stats(rng, 30, 3);
  LinearModel base = LinearModel::zeros(s.feature_names());
  base.set(1, 0.4);
  const IndexVector iv{0, 2, 0, 1};
  const Eigen::VectorXd alpha = fixtures::random_weights(rng, 4);
  const NormalSystem sys = build_normal_system(s, base, iv, alpha);
  std::normal_distribution<double> z;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd delta(4);
    for (Index j = 0; j < 4; ++j) delta(j) = z(rng);
    const double quad = sys.constant - 2.0 * sys.b.dot(delta) + delta.dot(sys.H * delta);
    EXPECT_NEAR(quad, path_objective(s, base, iv, delta, alpha), 1e-10);
  }
  const InnerSolution sol = solve_free(s, base, iv, alpha);
  EXPECT_LT((sys.H * sol.delta - sys.b).norm(), 1e-9);
}

TEST(InnerSolver, ZeroWeightsLeaveStepsAtZero) {
  const SufficientStats s = fixtures::toy();
  const LinearModel base = LinearModel::zeros(s.feature_names());
  Eigen::VectorXd alpha(3);
  alpha << 1.0, 0.0, 0.0;
  const InnerSolution sol = solve_free(s, base, IndexVector{0, 1, 0}, alpha);
  EXPECT_NEAR(sol.delta(0), 1.274, 1e-12);
  EXPECT_EQ(sol.delta(1), 0.0);
  EXPECT_EQ(sol.delta(2), 0.0);
}

TEST(InnerSolver, PrefixFactorizationTracksEveryPrefix) {
  std::mt19937_64 rng(8);
  const SufficientStats s = fixtures::random_stats(rng, 30, 4);
  const LinearModel base = LinearModel::zeros(s.feature_names());
  const Eigen::VectorXd alpha = fixtures::random_weights(rng, 5);
  const IndexVector iv{3, 1, 3, 0, 2};
  PrefixFactorization f(s, base, alpha);
  for (std::size_t j = 0; j < iv.size(); ++j) {
    f.push(iv[j]);
    // Steps not yet pushed are held at zero: the first j+1 steps move, the
    // rest repeat the model reached so far.
    IndexVector full = iv;
    auto fixed_tail = [&](const Eigen::VectorXd& d) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(5);
      delta.head(static_cast<Index>(j) + 1) = d;
      return path_objective(s, base, full, delta, alpha);
    };
    const Eigen::VectorXd d = oracles::minimize_cg(fixed_tail, Eigen::VectorXd::Zero(static_cast<Index>(j) + 1));
    EXPECT_NEAR(f.objective(), fixed_tail(d), 1e-8) << "prefix " << j + 1;
  }
  f.pop();
  f.pop();
  f.push(iv[3]);
  f.push(iv[4]);
  EXPECT_NEAR(f.objective(), free_objective(s, base, iv, alpha), 1e-12);
}

TEST(InnerSolver, SingularGramGivesMinimumScaledNorm) {
  Eigen::MatrixXd gram(2, 2);
  gram << 1, 1, 1, 1;
  Eigen::VectorXd cross(2);
  cross << 0.5, 0.5;
  const auto s = stats_from_moments(gram, cross, 1.0);
  const LinearModel base = LinearModel::zeros(s.feature_names());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  alpha(1) = 1.0;  // only the final model counts
  const InnerSolution sol = solve_free(s, base, IndexVector{0, 1}, alpha);
  EXPECT_NEAR(sol.delta(0) + sol.delta(1), 0.5, 1e-10);
  EXPECT_NEAR(sol.objective, 0.75, 1e-10);
  EXPECT_TRUE(sol.delta.allFinite());
}

TEST(InnerSolver, FixedEndpointReachesTargetAndMatchesOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const int K = d + trial % 3;
    const SufficientStats s = fixtures::random_stats(rng, 30, d);
    const LinearModel base = LinearModel::zeros(s.feature_names());
    IndexVector iv = random_iv(rng, d, K);
    for (int c = 0; c < d; ++c) iv[static_cast<std::size_t>(c)] = c;  // cover every coordinate
    std::shuffle(iv.begin(), iv.end(), rng);
    const LinearModel target = ols(s);
    const Eigen::VectorXd alpha = fixtures::random_weights(rng, K);
    const auto sol = solve_fixed_endpoint(s, base, iv, alpha, target);
    ASSERT_TRUE(sol.has_value());
    const LinearModel reached = to_path(base, iv, sol->delta, target).final_model();
    EXPECT_EQ(reached.coefficients(), target.coefficients()) << "trial " << trial;
    const double expect =
        constrained_oracle(moments_of(s), base.coefficients(), target.coefficients(), as_int(iv), alpha);
    EXPECT_NEAR(sol->objective, expect, 1e-7 * std::max(1.0, expect)) << "trial " << trial;
  }
}

TEST(InnerSolver, FixedEndpointNeedsEveryChangedCoordinate) {
  const SufficientStats s = fixtures::toy();
  const LinearModel base = LinearModel::zeros(s.feature_names());
  const LinearModel target = ols(s);
  EXPECT_FALSE(solve_fixed_endpoint(s, base, IndexVector{0, 0}, Eigen::VectorXd::Ones(2), target).has_value());
  const auto ok = solve_fixed_endpoint(s, base, IndexVector{0, 1, 0}, Eigen::VectorXd::Ones(3), target);
  ASSERT_TRUE(ok.has_value());
  EXPECT_LE(ok->objective, 0.60 + 0.43 + 0.25 + 0.01);
}

TEST(InnerSolver, GreedyStepMatchesTernarySearch) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const SufficientStats s = fixtures::random_stats(rng, 40, 4);
    LinearModel current = LinearModel::zeros(s.feature_names());
    for (int k = 0; k < 3; ++k) {
      const GreedyStep step = greedy_step(s, current);
      const auto expect = oracles::ternary_greedy(moments_of(s), current.coefficients());
      EXPECT_EQ(step.feature, expect.feature);
      EXPECT_NEAR(step.value, expect.value, 1e-6);
      EXPECT_NEAR(step.cost, expect.cost, 1e-10);
      current.set(step.feature, step.value);
    }
  }
}

TEST(InnerSolver, RejectsBadArguments) {
  const SufficientStats s = fixtures::toy();
  const LinearModel base = LinearModel::zeros(s.feature_names());
  EXPECT_THROW(solve_free(s, base, IndexVector{2}, Eigen::VectorXd::Ones(1)), InvalidInput);
  EXPECT_THROW(solve_free(s, base, IndexVector{0}, Eigen::VectorXd::Ones(2)), InvalidInput);
  EXPECT_THROW(solve_free(s, base, IndexVector{0}, -Eigen::VectorXd::Ones(1)), InvalidInput);
}
