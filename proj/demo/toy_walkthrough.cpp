// Two correlated features, height and weight, predicting age. Walks through
// hand-built paths, the greedy path, the optimal path and the tradeoff front.

#include <iostream>

#include "pathlens/pathlens.hpp"

using namespace pathlens;

int main() {
  Eigen::MatrixXd gram(2, 2);
  gram << 1.0, 0.9, 0.9, 1.0;
  Eigen::VectorXd cross(2);
  cross << 1.274, 0.968;
  const SufficientStats stats = stats_from_moments(gram, cross, 2.04, {"height", "weight"});
  const LinearModel zero = LinearModel::zeros(stats.feature_names());
  const LinearModel fit = ols(stats);
  const WeightSchedule gamma1 = WeightSchedule::geometric(1.0);

  std::cout << "least-squares fit: height " << fixed(fit[0], 2) << ", weight " << fixed(fit[1], 2) << "\n\n";

  const CoordinatePath height_first(zero, {{0, fit[0]}, {1, fit[1]}});
  const CoordinatePath weight_first(zero, {{1, fit[1]}, {0, fit[0]}});
  const CoordinatePath three_steps(zero, {{0, 1.70}, {1, fit[1]}, {0, fit[0]}});
  for (const auto* p : {&height_first, &weight_first, &three_steps}) {
    std::cout << render_path_table(stats, *p, 2);
    std::cout << "loss with gamma=1: " << fixed(weighted_loss(stats, *p, gamma1), 2) << "\n\n";
  }

  std::cout << "greedy, two steps:\n" << render_path_table(stats, greedy_path(stats, zero, 2), 3) << "\n";

  OptimizerConfig cfg;
  cfg.K = 2;
  const PathResult best = exact_path(stats, zero, cfg);
  std::cout << "optimal two-step path (loss " << fixed(best.objective, 3) << "):\n"
            << render_path_table(stats, best.path, 3) << "\n";

  const FrontReport front = sweep(stats, zero, gamma1, default_lambda_grid(), 3);
  std::cout << "tradeoff front, " << front.points.size() << " points:\n";
  for (const auto& pt : front.points) {
    std::cout << "  K=" << pt.K << "  loss " << fixed(pt.interp_loss, 3) << "  MSE " << fixed(pt.cost, 3) << "\n";
  }
  return 0;
}
