#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "pathlens/regression.hpp"

namespace fixtures {

using pathlens::Dataset;
using pathlens::SufficientStats;

// Height/weight toy instance: unit-variance features with correlation 0.9.
inline SufficientStats toy() {
  Eigen::MatrixXd gram(2, 2);
  gram << 1.0, 0.9, 0.9, 1.0;
  Eigen::VectorXd cross(2);
  cross << 1.274, 0.968;
  return pathlens::stats_from_moments(gram, cross, 2.04, {"height", "weight"});
}

// Gaussian design with pairwise correlation `rho`, noisy linear response.
inline Dataset random_dataset(std::mt19937_64& rng, int n, int d, double rho = 0.3, double noise = 0.5) {
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset ds;
  ds.features.resize(n, d);
  ds.target.resize(n);
  Eigen::VectorXd beta(d);
  for (int j = 0; j < d; ++j) beta(j) = z(rng);
  for (int i = 0; i < n; ++i) {
    const double common = z(rng);
    for (int j = 0; j < d; ++j) ds.features(i, j) = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * z(rng);
    ds.target(i) = ds.features.row(i).dot(beta) + noise * z(rng);
  }
  for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

inline SufficientStats random_stats(std::mt19937_64& rng, int n, int d, double rho = 0.3) {
  return pathlens::compute_stats(pathlens::standardize(random_dataset(rng, n, d, rho)).first);
}

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, int K) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  Eigen::VectorXd a(K);
  for (int k = 0; k < K; ++k) a(k) = u(rng);
  return a;
}

}  // namespace fixtures
