#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pathlens/errors.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

/// One coordinate step: coefficient `feature` is overwritten with `value`.
struct Step {
  Index feature = 0;
  double value = 0.0;

  friend bool operator==(const Step&, const Step&) = default;
};

/// A base model followed by an ordered list of single-coordinate updates.
/// Every materialized model differs from its predecessor in at most one
/// coefficient.
class CoordinatePath {
 public:
  CoordinatePath() = default;

  explicit CoordinatePath(LinearModel base, std::vector<Step> steps = {})
      : base_(std::move(base)), steps_(std::move(steps)) {
    for (const auto& s : steps_) check(s);
  }

  const LinearModel& base() const { return base_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t length() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  void push_back(Step s) {
    check(s);
    steps_.push_back(s);
  }

  /// Path without its last step.
  CoordinatePath truncated() const {
    CoordinatePath out = *this;
    if (!out.steps_.empty()) out.steps_.pop_back();
    return out;
  }

  /// Model reached after all steps (the base for an empty path).
  LinearModel final_model() const {
    LinearModel m = base_;
    for (const auto& s : steps_) m.set(s.feature, s.value);
    return m;
  }

  friend bool operator==(const CoordinatePath&, const CoordinatePath&) = default;

 private:
  void check(const Step& s) const {
    if (s.feature < 0 || s.feature >= base_.size()) {
      throw InvalidInput("step feature index " + std::to_string(s.feature) + " out of range [0, " +
                         std::to_string(base_.size()) + ")");
    }
    if (!std::isfinite(s.value)) throw InvalidInput("step value must be finite");
  }

  LinearModel base_;
  std::vector<Step> steps_;
};

/// Per-step costs c_1..c_K; entries past K are implicitly zero.
struct CostSequence {
  std::vector<double> values;

  double at(std::size_t k) const { return k < values.size() ? values[k] : 0.0; }
  std::size_t size() const { return values.size(); }
};

/// Step weights alpha_k, k = 1, 2, ...
class WeightSchedule {
 public:
  enum class Kind { explicit_weights, geometric, distribution };

  static WeightSchedule explicit_weights(std::vector<double> alpha) {
    for (double a : alpha) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidInput("schedule weights must be finite and nonnegative");
    }
    return WeightSchedule(Kind::explicit_weights, std::move(alpha), 0.0);
  }

  static WeightSchedule geometric(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive and finite");
    return WeightSchedule(Kind::geometric, {}, gamma);
  }

  static WeightSchedule distribution(std::vector<double> p) {
    if (p.empty()) throw InvalidInput("distribution schedule needs at least one probability");
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("probabilities must be finite and nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidInput("probabilities must sum to 1 (got " + std::to_string(total) + ")");
    }
    return WeightSchedule(Kind::distribution, std::move(p), 0.0);
  }

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& listed_weights() const { return weights_; }

  /// alpha_k for step number k >= 1.
  double weight(std::size_t k) const {
    if (k == 0) throw InvalidInput("step numbers start at 1");
    switch (kind_) {
      case Kind::geometric:
        return std::pow(gamma_, static_cast<double>(k));
      case Kind::distribution:
        return k <= weights_.size() ? weights_[k - 1] : 0.0;
      case Kind::explicit_weights:
        break;
    }
    if (k > weights_.size()) {
      throw InvalidInput("explicit schedule defines " + std::to_string(weights_.size()) +
                         " weights, step " + std::to_string(k) + " requested");
    }
    return weights_[k - 1];
  }

  /// (alpha_1, ..., alpha_K).
  Eigen::VectorXd weights(std::size_t K) const {
    Eigen::VectorXd alpha(static_cast<Index>(K));
    for (std::size_t k = 1; k <= K; ++k) alpha(static_cast<Index>(k) - 1) = weight(k);
    return alpha;
  }

 private:
  WeightSchedule(Kind kind, std::vector<double> weights, double gamma)
      : kind_(kind), weights_(std::move(weights)), gamma_(gamma) {}

  Kind kind_;
  std::vector<double> weights_;
  double gamma_;
};

inline std::vector<LinearModel> materialize(const CoordinatePath& path) {
  std::vector<LinearModel> models;
  models.reserve(path.length());
  LinearModel current = path.base();
  for (const auto& s : path.steps()) {
    current.set(s.feature, s.value);
    models.push_back(current);
  }
  return models;
}

inline CostSequence cost_sequence(const SufficientStats& stats, const CoordinatePath& path) {
  if (path.base().size() != stats.dim()) throw InvalidInput("path dimension does not match statistics");
  CostSequence seq;
  seq.values.reserve(path.length());
  Eigen::VectorXd beta = path.base().coefficients();
  for (const auto& s : path.steps()) {
    beta(s.feature) = s.value;
    seq.values.push_back(cost(stats, beta));
  }
  return seq;
}

/// Path length K.
inline std::size_t complexity_loss(const CoordinatePath& path) { return path.length(); }

/// Number of coordinates where `target` differs from `base`; the minimum
/// number of coordinate steps needed to go from one to the other.
inline std::size_t model_complexity(const LinearModel& base, const LinearModel& target) {
  if (base.size() != target.size()) throw InvalidInput("model dimensions differ");
  return static_cast<std::size_t>((base.coefficients().array() != target.coefficients().array()).count());
}

/// Coordinates where `target` differs from `base`, ascending.
inline std::vector<Index> changed_coordinates(const LinearModel& base, const LinearModel& target) {
  if (base.size() != target.size()) throw InvalidInput("model dimensions differ");
  std::vector<Index> out;
  for (Index i = 0; i < base.size(); ++i) {
    if (base[i] != target[i]) out.push_back(i);
  }
  return out;
}

inline double weighted_loss(const CostSequence& costs, const WeightSchedule& schedule) {
  double total = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) total += schedule.weight(k + 1) * costs.values[k];
  return total;
}

/// sum_k alpha_k c(beta_k).
inline double weighted_loss(const SufficientStats& stats, const CoordinatePath& path,
                            const WeightSchedule& schedule) {
  return weighted_loss(cost_sequence(stats, path), schedule);
}

/// Componentwise a_k <= b_k after zero padding.
inline bool dominates(const CostSequence& a, const CostSequence& b) {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.at(k) > b.at(k)) return false;
  }
  return true;
}

/// Lexicographic a <= b after zero padding.
inline bool lexicographically_precedes(const CostSequence& a, const CostSequence& b) {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.at(k) < b.at(k)) return true;
    if (a.at(k) > b.at(k)) return false;
  }
  return true;
}

/// Model loss of an unreachable model.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

}  // namespace pathlens
