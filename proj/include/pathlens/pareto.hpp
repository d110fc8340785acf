#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathlens/errors.hpp"
#include "pathlens/optimizers.hpp"
#include "pathlens/parallel.hpp"
#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

enum class Solver { exact, local };

inline const char* to_string(Solver s) { return s == Solver::exact ? "exact" : "local"; }

/// Settings forwarded to the fixed-length optimizer.
struct TradeoffOptions {
  Solver solver = Solver::exact;
  std::size_t q = 1;
  std::size_t T = 100;
  std::uint64_t seed = 0;
  std::uint64_t enumeration_budget = 10'000'000;
  StepMode step_mode = StepMode::continuous;
};

/// One model on the cost / interpretability tradeoff, with its explanation.
struct ParetoPoint {
  LinearModel model;
  double cost = 0.0;
  double interp_loss = 0.0;
  std::size_t K = 0;
  double lambda = 0.0;
  CoordinatePath path;
};

struct FrontReport {
  /// Undominated points sorted by interp_loss.
  std::vector<ParetoPoint> points;
  /// One selection per lambda, in grid order (before merging and filtering).
  std::vector<ParetoPoint> selections;
  std::string schedule;
  std::vector<double> lambda_grid;
  std::size_t K_max = 0;
  Solver solver = Solver::exact;
};

/// Human-readable schedule label ("gamma=1", "weights=[...]", "dist=[...]").
inline std::string describe(const WeightSchedule& s) {
  auto list = [](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      out += buf;
    }
    return out + "]";
  };
  char buf[64];
  switch (s.kind()) {
    case WeightSchedule::Kind::geometric:
      std::snprintf(buf, sizeof buf, "gamma=%.17g", s.gamma());
      return buf;
    case WeightSchedule::Kind::distribution:
      return "dist=" + list(s.listed_weights());
    case WeightSchedule::Kind::explicit_weights:
      break;
  }
  return "weights=" + list(s.listed_weights());
}

/// a is at least as good in both objectives and strictly better in one.
inline bool point_dominates(double cost_a, double loss_a, double cost_b, double loss_b, double tol = 1e-10) {
  return cost_a <= cost_b + tol && loss_a <= loss_b + tol && (cost_a < cost_b - tol || loss_a < loss_b - tol);
}

/// Pairs (i, j) where point i dominates point j.
inline std::vector<std::pair<std::size_t, std::size_t>> dominated_pairs(const std::vector<double>& costs,
                                                                        const std::vector<double>& losses,
                                                                        double tol = 1e-10) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    for (std::size_t j = 0; j < costs.size(); ++j) {
      if (i != j && point_dominates(costs[i], losses[i], costs[j], losses[j], tol)) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace detail {

inline ParetoPoint make_point(const SufficientStats& stats, const CoordinatePath& path,
                              const WeightSchedule& schedule, double lambda) {
  ParetoPoint p;
  p.path = path;
  p.model = path.final_model();
  p.cost = cost(stats, p.model);
  p.interp_loss = weighted_loss(stats, path, schedule);
  p.K = path.length();
  p.lambda = lambda;
  return p;
}

inline PathResult run_fixed_length(const SufficientStats& stats, const LinearModel& base,
                                   const Eigen::VectorXd& alpha, const TradeoffOptions& opts) {
  OptimizerConfig cfg;
  cfg.K = static_cast<std::size_t>(alpha.size());
  cfg.step_mode = opts.step_mode;
  cfg.seed = opts.seed;
  cfg.q = std::min(opts.q, std::max<std::size_t>(cfg.K, 1));
  cfg.T = opts.T;
  cfg.enumeration_budget = opts.enumeration_budget;
  if (opts.solver == Solver::exact || cfg.K == 0) return exact_with_weights(stats, base, alpha, cfg);
  const CoordinatePath start = greedy_path(stats, base, cfg.K, cfg.step_mode);
  return local_with_weights(stats, base, path_indices(start, cfg.step_mode), alpha, cfg);
}

}  // namespace detail

/// Minimizes c(beta_K) + lambda * sum_k alpha_k c(beta_k) over K in
/// [0, K_max] and K-step paths. For each K the fixed-length optimizer runs
/// with weights lambda*alpha_k, plus 1 on the last step. Near-ties go to the
/// shorter path.
inline ParetoPoint solve_tradeoff(const SufficientStats& stats, const LinearModel& base,
                                  const WeightSchedule& schedule, double lambda, std::size_t K_max,
                                  const TradeoffOptions& opts = {}) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and nonnegative");
  if (base.size() != stats.dim()) throw InvalidInput("base model dimension does not match statistics");

  CoordinatePath best_path(base);
  double best_value = cost(stats, base);
  for (std::size_t K = 1; K <= K_max; ++K) {
    Eigen::VectorXd alpha = lambda * schedule.weights(K);
    alpha(static_cast<Index>(K) - 1) += 1.0;
    const PathResult r = detail::run_fixed_length(stats, base, alpha, opts);
    if (r.objective < best_value - 1e-12 * std::max(1.0, std::abs(best_value))) {
      best_value = r.objective;
      best_path = r.path;
    }
  }
  return detail::make_point(stats, best_path, schedule, lambda);
}

/// n logarithmically spaced values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw InvalidInput("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

/// 61 values from 1e-3 to 1e3.
inline std::vector<double> default_lambda_grid() { return log_grid(1e-3, 1e3, 61); }

/// Weighted-sum sweep over the lambda grid. Only supported (convex-hull)
/// parts of the front are reachable this way; gaps are left as they are.
inline FrontReport sweep(const SufficientStats& stats, const LinearModel& base, const WeightSchedule& schedule,
                         const std::vector<double>& lambda_grid, std::size_t K_max,
                         const TradeoffOptions& opts = {}) {
  if (lambda_grid.empty()) throw InvalidInput("lambda grid must not be empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidInput("lambda values must be finite and nonnegative");
  }

  FrontReport report;
  report.schedule = describe(schedule);
  report.lambda_grid = lambda_grid;
  report.K_max = K_max;
  report.solver = opts.solver;
  report.selections.resize(lambda_grid.size());
  parallel_tasks(lambda_grid.size(), [&](std::size_t i) {
    report.selections[i] = solve_tradeoff(stats, base, schedule, lambda_grid[i], K_max, opts);
  });

  // Merge repeats of the same (model, loss), keeping the smallest lambda.
  std::vector<ParetoPoint> merged;
  for (const auto& p : report.selections) {
    auto same = std::find_if(merged.begin(), merged.end(), [&](const ParetoPoint& m) {
      return (m.model.coefficients() - p.model.coefficients()).cwiseAbs().maxCoeff() <= 1e-9 &&
             std::abs(m.interp_loss - p.interp_loss) <= 1e-9 * std::max(1.0, std::abs(p.interp_loss));
    });
    if (same == merged.end()) {
      merged.push_back(p);
    } else if (p.lambda < same->lambda) {
      *same = p;
    }
  }

  for (std::size_t j = 0; j < merged.size(); ++j) {
    bool dominated = false;
    for (std::size_t i = 0; i < merged.size() && !dominated; ++i) {
      dominated = i != j && point_dominates(merged[i].cost, merged[i].interp_loss, merged[j].cost,
                                            merged[j].interp_loss);
    }
    if (!dominated) report.points.push_back(merged[j]);
  }
  std::sort(report.points.begin(), report.points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.interp_loss != b.interp_loss) return a.interp_loss < b.interp_loss;
    return a.cost < b.cost;
  });
  return report;
}

/// Path minimizing E_k[c(beta_k)] when the stopping step k is drawn from p
/// (p_k for k = 1..K_max, with K_max = p.size()).
inline PathResult expected_cost_path(const SufficientStats& stats, const LinearModel& base,
                                     const std::vector<double>& p, const TradeoffOptions& opts = {}) {
  const WeightSchedule schedule = WeightSchedule::distribution(p);
  return detail::run_fixed_length(stats, base, schedule.weights(p.size()), opts);
}

}  // namespace pathlens
