#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pathlens/errors.hpp"
#include "pathlens/inner_solver.hpp"
#include "pathlens/parallel.hpp"
#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

/// continuous: a step may set its coefficient to any real value.
/// unit: a step adds or subtracts exactly one point (score-system paths).
enum class StepMode { continuous, unit };

struct OptimizerConfig {
  std::size_t K = 0;
  WeightSchedule schedule = WeightSchedule::geometric(1.0);
  /// When set, the last model of the path must equal this model.
  std::optional<LinearModel> endpoint;
  StepMode step_mode = StepMode::continuous;
  std::uint64_t seed = 0;
  /// Local improvement: positions resampled per iteration.
  std::size_t q = 1;
  /// Local improvement: iterations.
  std::size_t T = 100;
  /// Exact enumeration: maximum number of candidate index vectors.
  std::uint64_t enumeration_budget = 10'000'000;
  /// Exact enumeration: skip index vectors that repeat a coordinate in two
  /// consecutive steps. Off by default; not known to preserve optimality.
  bool skip_consecutive_duplicates = false;
};

/// An optimized path together with its encoding and objective.
struct PathResult {
  CoordinatePath path;
  /// Step encoding: feature indices (continuous) or unit move codes.
  IndexVector indices;
  /// sum_k alpha_k c(beta_k); +inf when no feasible path was found.
  double objective = 0.0;
  /// Local improvement only: best objective at the start and after each iteration.
  std::vector<double> trace;
};

/// Unit move code for (feature, +1) or (feature, -1).
inline Index unit_move(Index feature, int sign) { return 2 * feature + (sign < 0 ? 1 : 0); }

namespace detail {

inline constexpr double kImprovementTol = 1e-12;

/// Evaluates step encodings for one (stats, base, weights, mode, endpoint)
/// problem. Continuous encodings are feature indices; the inner problem over
/// step values is solved exactly. Unit encodings fix the values to +-1.
class MoveSpace {
 public:
  MoveSpace(const SufficientStats& stats, const LinearModel& base, Eigen::VectorXd alpha, StepMode mode,
            std::optional<LinearModel> endpoint)
      : stats_(&stats), base_(base), alpha_(std::move(alpha)), mode_(mode), endpoint_(std::move(endpoint)) {
    if (base_.size() != stats.dim()) throw InvalidInput("base model dimension does not match statistics");
    if (endpoint_ && endpoint_->size() != stats.dim()) {
      throw InvalidInput("endpoint model dimension does not match statistics");
    }
    if (alpha_.size() > 0) check_weights(alpha_);
  }

  Index alphabet() const { return mode_ == StepMode::unit ? 2 * stats_->dim() : stats_->dim(); }
  std::size_t length() const { return static_cast<std::size_t>(alpha_.size()); }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  bool continuous_free() const { return mode_ == StepMode::continuous && !endpoint_; }

  /// Positions whose choice can change the objective or feasibility.
  std::size_t active_length() const {
    if (endpoint_) return length();
    std::size_t J = length();
    while (J > 0 && alpha_(static_cast<Index>(J) - 1) <= 0.0) --J;
    return J;
  }

  double evaluate(std::span<const Index> moves) const {
    if (mode_ == StepMode::continuous) {
      if (!endpoint_) return free_objective(*stats_, base_, moves, alpha_);
      const auto sol = solve_fixed_endpoint(*stats_, base_, moves, alpha_, *endpoint_);
      return sol ? sol->objective : kUnreachable;
    }
    Eigen::VectorXd beta = base_.coefficients();
    double total = 0.0;
    for (std::size_t j = 0; j < moves.size(); ++j) {
      beta(moves[j] / 2) += (moves[j] % 2 == 0) ? 1.0 : -1.0;
      total += alpha_(static_cast<Index>(j)) * cost(*stats_, beta);
    }
    if (endpoint_ && (beta - endpoint_->coefficients()).cwiseAbs().maxCoeff() > 1e-9) return kUnreachable;
    return total;
  }

  PathResult realize(std::span<const Index> moves) const {
    PathResult out;
    out.indices.assign(moves.begin(), moves.end());
    if (mode_ == StepMode::continuous) {
      if (!endpoint_) {
        const InnerSolution sol = solve_free(*stats_, base_, moves, alpha_);
        out.path = to_path(base_, moves, sol.delta);
        out.objective = sol.objective;
        return out;
      }
      const auto sol = solve_fixed_endpoint(*stats_, base_, moves, alpha_, *endpoint_);
      if (!sol) throw Infeasible("no path with the requested steps reaches the endpoint");
      out.path = to_path(base_, moves, sol->delta, *endpoint_);
      out.objective = sol->objective;
      return out;
    }
    out.path = CoordinatePath(base_);
    Eigen::VectorXd beta = base_.coefficients();
    for (Index m : moves) {
      beta(m / 2) += (m % 2 == 0) ? 1.0 : -1.0;
      out.path.push_back({m / 2, beta(m / 2)});
    }
    out.objective = evaluate(moves);
    return out;
  }

  const SufficientStats& stats() const { return *stats_; }
  const LinearModel& base() const { return base_; }

 private:
  const SufficientStats* stats_;
  LinearModel base_;
  Eigen::VectorXd alpha_;
  StepMode mode_;
  std::optional<LinearModel> endpoint_;
};

struct Incumbent {
  double objective = std::numeric_limits<double>::infinity();
  IndexVector moves;
};

inline std::uint64_t checked_power(std::uint64_t base, std::size_t exponent, std::uint64_t cap) {
  std::uint64_t value = 1;
  for (std::size_t e = 0; e < exponent; ++e) {
    if (base != 0 && value > cap / base) return cap + 1;
    value *= base;
  }
  return value;
}

/// Depth-first enumeration in lexicographic order. Strict comparison keeps
/// the lexicographically first among equal objectives.
class Enumerator {
 public:
  Enumerator(const MoveSpace& space, bool skip_duplicates) : space_(space), skip_duplicates_(skip_duplicates) {}

  Incumbent run(std::uint64_t budget) const {
    const std::size_t J = space_.active_length();
    const auto A = static_cast<std::uint64_t>(space_.alphabet());
    if (checked_power(A, J, budget) > budget) {
      throw BudgetExceeded("exhaustive search needs " + std::to_string(A) + "^" + std::to_string(J) +
                           " candidates, more than the budget of " + std::to_string(budget) +
                           "; use local improvement instead");
    }
    if (J == 0) {
      Incumbent inc;
      inc.moves.assign(space_.length(), 0);
      inc.objective = space_.evaluate(inc.moves);
      return inc;
    }
    const std::size_t prefix = std::min<std::size_t>(J, A <= 16 ? 2 : 1);
    const std::size_t tasks = static_cast<std::size_t>(checked_power(A, prefix, budget));
    std::vector<Incumbent> partial(tasks);
    parallel_tasks(tasks, [&](std::size_t t) {
      IndexVector moves(space_.length(), 0);
      std::size_t code = t;
      for (std::size_t p = prefix; p-- > 0;) {
        moves[p] = static_cast<Index>(code % A);
        code /= A;
      }
      if (skip_duplicates_) {
        for (std::size_t p = 1; p < prefix; ++p) {
          if (moves[p] == moves[p - 1]) return;
        }
      }
      Incumbent& inc = partial[t];
      if (space_.continuous_free()) {
        PrefixFactorization f(space_.stats(), space_.base(), space_.alpha());
        for (std::size_t p = 0; p < prefix; ++p) f.push(moves[p]);
        dfs_free(f, moves, prefix, J, inc);
      } else {
        dfs_leaf(moves, prefix, J, inc);
      }
    });
    Incumbent best;
    for (auto& inc : partial) {
      if (!inc.moves.empty() && inc.objective < best.objective) best = std::move(inc);
    }
    return best;
  }

 private:
  void dfs_free(PrefixFactorization& f, IndexVector& moves, std::size_t pos, std::size_t J, Incumbent& inc) const {
    if (pos == J) {
      const double obj = f.objective();
      if (inc.moves.empty() || obj < inc.objective) {
        inc.objective = obj;
        inc.moves = moves;
      }
      return;
    }
    const Index A = space_.alphabet();
    for (Index m = 0; m < A; ++m) {
      if (skip_duplicates_ && pos > 0 && moves[pos - 1] == m) continue;
      moves[pos] = m;
      f.push(m);
      dfs_free(f, moves, pos + 1, J, inc);
      f.pop();
    }
    moves[pos] = 0;
  }

  void dfs_leaf(IndexVector& moves, std::size_t pos, std::size_t J, Incumbent& inc) const {
    if (pos == J) {
      const double obj = space_.evaluate(moves);
      if (inc.moves.empty() || obj < inc.objective) {
        inc.objective = obj;
        inc.moves = moves;
      }
      return;
    }
    const Index A = space_.alphabet();
    for (Index m = 0; m < A; ++m) {
      if (skip_duplicates_ && pos > 0 && moves[pos - 1] == m) continue;
      moves[pos] = m;
      dfs_leaf(moves, pos + 1, J, inc);
    }
    moves[pos] = 0;
  }

  const MoveSpace& space_;
  bool skip_duplicates_;
};

inline void check_config(const OptimizerConfig& cfg) {
  if (cfg.K >= 1 && (cfg.q < 1 || cfg.q > cfg.K)) throw InvalidInput("batch size q must be in [1, K]");
  if (cfg.T < 1) throw InvalidInput("iteration count T must be at least 1");
}

inline PathResult exact_with_weights(const SufficientStats& stats, const LinearModel& base,
                                     const Eigen::VectorXd& alpha, const OptimizerConfig& cfg) {
  if (alpha.size() == 0) {
    if (cfg.endpoint && !(*cfg.endpoint == base)) {
      if (model_complexity(base, *cfg.endpoint) > 0) throw Infeasible("an empty path cannot reach the endpoint");
    }
    PathResult out;
    out.path = CoordinatePath(base);
    return out;
  }
  const MoveSpace space(stats, base, alpha, cfg.step_mode, cfg.endpoint);
  const Incumbent best = Enumerator(space, cfg.skip_consecutive_duplicates).run(cfg.enumeration_budget);
  if (best.moves.empty() || !(best.objective < kUnreachable)) {
    throw Infeasible("no path of length " + std::to_string(alpha.size()) + " satisfies the constraints");
  }
  return space.realize(best.moves);
}

}  // namespace detail

/// Repeated greedy_step: K steps, each the best single-coordinate move.
/// In unit mode the best +-1 move is taken instead.
inline CoordinatePath greedy_path(const SufficientStats& stats, const LinearModel& base, std::size_t K,
                                  StepMode mode = StepMode::continuous) {
  if (base.size() != stats.dim()) throw InvalidInput("base model dimension does not match statistics");
  CoordinatePath path(base);
  LinearModel current = base;
  for (std::size_t k = 0; k < K; ++k) {
    if (mode == StepMode::continuous) {
      const GreedyStep s = greedy_step(stats, current);
      current.set(s.feature, s.value);
      path.push_back({s.feature, s.value});
      continue;
    }
    Index best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta = current.coefficients();
    for (Index m = 0; m < 2 * stats.dim(); ++m) {
      const Index c = m / 2;
      const double old = beta(c);
      beta(c) += (m % 2 == 0) ? 1.0 : -1.0;
      const double value = cost(stats, beta);
      beta(c) = old;
      if (value < best_cost) {
        best_cost = value;
        best = m;
      }
    }
    const Index c = best / 2;
    current.set(c, current[c] + ((best % 2 == 0) ? 1.0 : -1.0));
    path.push_back({c, current[c]});
  }
  return path;
}

/// Step encoding of a path: feature indices (continuous) or unit move codes.
inline IndexVector path_indices(const CoordinatePath& path, StepMode mode = StepMode::continuous) {
  IndexVector iv;
  iv.reserve(path.length());
  Eigen::VectorXd beta = path.base().coefficients();
  for (const auto& s : path.steps()) {
    if (mode == StepMode::unit) {
      iv.push_back(unit_move(s.feature, s.value < beta(s.feature) ? -1 : 1));
    } else {
      iv.push_back(s.feature);
    }
    beta(s.feature) = s.value;
  }
  return iv;
}

/// Installs final least-squares coefficients one at a time; each step picks
/// the not-yet-installed coordinate with the lowest immediate cost.
inline CoordinatePath direct_path(const SufficientStats& stats, const LinearModel& base, std::size_t K) {
  if (base.size() != stats.dim()) throw InvalidInput("base model dimension does not match statistics");
  const LinearModel target = ols(stats);
  std::vector<Index> pending = changed_coordinates(base, target);
  if (K > pending.size()) {
    throw InvalidInput("direct path has at most " + std::to_string(pending.size()) + " steps, " +
                       std::to_string(K) + " requested");
  }
  CoordinatePath path(base);
  Eigen::VectorXd beta = base.coefficients();
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pending.size(); ++p) {
      const Index c = pending[p];
      const double old = beta(c);
      beta(c) = target[c];
      const double value = cost(stats, beta);
      beta(c) = old;
      if (value < best_cost) {
        best_cost = value;
        best = p;
      }
    }
    const Index c = pending[best];
    beta(c) = target[c];
    path.push_back({c, target[c]});
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return path;
}

/// Globally optimal K-step path for sum_k alpha_k c(beta_k) by exhaustive
/// enumeration of step encodings with an exact inner solve for each.
inline PathResult exact_path(const SufficientStats& stats, const LinearModel& base, const OptimizerConfig& cfg) {
  return detail::exact_with_weights(stats, base, cfg.schedule.weights(cfg.K), cfg);
}

namespace detail {

inline PathResult local_with_weights(const SufficientStats& stats, const LinearModel& base, IndexVector moves,
                                     const Eigen::VectorXd& alpha, const OptimizerConfig& cfg) {
  const MoveSpace space(stats, base, alpha, cfg.step_mode, cfg.endpoint);
  const std::size_t K = space.length();
  if (moves.size() != K) throw InvalidInput("starting index vector must have K entries");
  for (Index m : moves) {
    if (m < 0 || m >= space.alphabet()) throw InvalidInput("starting index vector entry out of range");
  }
  if (K == 0) {
    PathResult out = exact_with_weights(stats, base, alpha, cfg);
    out.trace = {out.objective};
    return out;
  }
  check_config(cfg);

  std::mt19937_64 rng(cfg.seed);
  const Index A = space.alphabet();
  const std::size_t q = cfg.q;
  const std::uint64_t scan = checked_power(static_cast<std::uint64_t>(A), q, cfg.enumeration_budget);
  if (scan > cfg.enumeration_budget) {
    throw BudgetExceeded("a batch of q = " + std::to_string(q) + " positions needs more than " +
                         std::to_string(cfg.enumeration_budget) + " candidates per iteration");
  }
  const auto candidates = static_cast<std::size_t>(scan);
  std::vector<std::size_t> positions(K);
  std::vector<double> scores(candidates);

  double best = space.evaluate(moves);
  std::vector<double> trace{best};
  for (std::size_t t = 0; t < cfg.T; ++t) {
    // Uniform q-subset of step positions (partial Fisher-Yates).
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t p = 0; p < q; ++p) {
      std::uniform_int_distribution<std::size_t> pick(p, K - 1);
      std::swap(positions[p], positions[pick(rng)]);
    }
    std::vector<std::size_t> chosen(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(q));
    std::sort(chosen.begin(), chosen.end());

    auto decode = [&](std::size_t code, IndexVector& cand) {
      for (std::size_t p = q; p-- > 0;) {
        cand[chosen[p]] = static_cast<Index>(code % static_cast<std::size_t>(A));
        code /= static_cast<std::size_t>(A);
      }
    };
    parallel_tasks(candidates, [&](std::size_t code) {
      IndexVector cand = moves;
      decode(code, cand);
      scores[code] = space.evaluate(cand);
    });
    std::size_t winner = candidates;
    double winner_score = std::numeric_limits<double>::infinity();
    for (std::size_t code = 0; code < candidates; ++code) {
      if (scores[code] < winner_score) {
        winner_score = scores[code];
        winner = code;
      }
    }
    if (winner < candidates && winner_score < best - kImprovementTol) {
      decode(winner, moves);
      best = winner_score;
    }
    trace.push_back(best);
  }
  if (!(best < kUnreachable)) throw Infeasible("local improvement found no path satisfying the endpoint");
  PathResult out = space.realize(moves);
  out.trace = std::move(trace);
  return out;
}

}  // namespace detail

/// Local improvement heuristic: each iteration resamples q step positions,
/// tries every reassignment of their coordinates and keeps the best one if
/// it strictly improves the objective. Improvements carry over to the next
/// iteration. `start` holds feature indices (continuous) or unit move codes.
inline PathResult local_improvement(const SufficientStats& stats, const LinearModel& base, IndexVector start,
                                    const OptimizerConfig& cfg) {
  return detail::local_with_weights(stats, base, std::move(start), cfg.schedule.weights(cfg.K), cfg);
}

/// Starts from the greedy path.
inline PathResult local_improvement(const SufficientStats& stats, const LinearModel& base,
                                    const OptimizerConfig& cfg) {
  return local_improvement(stats, base, path_indices(greedy_path(stats, base, cfg.K, cfg.step_mode), cfg.step_mode),
                           cfg);
}

/// Best explanation of `target` among paths of length <= K_max: the
/// interpretability loss of the model (an upper bound on the loss over
/// unbounded lengths). Equal losses go to the shorter path.
inline PathResult best_explanation(const SufficientStats& stats, const LinearModel& base, const LinearModel& target,
                                   const WeightSchedule& schedule, std::size_t K_max,
                                   std::uint64_t enumeration_budget = 10'000'000,
                                   StepMode mode = StepMode::continuous) {
  if (base.size() != stats.dim() || target.size() != stats.dim()) {
    throw InvalidInput("model dimension does not match statistics");
  }
  const std::size_t complexity = model_complexity(base, target);
  if (complexity > K_max) {
    throw Infeasible("target differs from the base in " + std::to_string(complexity) +
                     " coordinates; K_max = " + std::to_string(K_max) + " is too short");
  }
  if (complexity == 0) {
    PathResult out;
    out.path = CoordinatePath(base);
    return out;
  }
  OptimizerConfig cfg;
  cfg.endpoint = target;
  cfg.step_mode = mode;
  cfg.enumeration_budget = enumeration_budget;
  std::optional<PathResult> best;
  for (std::size_t K = complexity; K <= K_max; ++K) {
    PathResult candidate;
    try {
      candidate = detail::exact_with_weights(stats, base, schedule.weights(K), cfg);
    } catch (const Infeasible&) {
      continue;  // unit steps can miss the endpoint at some lengths
    }
    if (!best || candidate.objective < best->objective) best = std::move(candidate);
  }
  if (!best) throw Infeasible("no explanation of the target within K_max steps");
  return *best;
}

}  // namespace pathlens
