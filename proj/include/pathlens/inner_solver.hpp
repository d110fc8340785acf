#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathlens/errors.hpp"
#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

/// Coordinate modified at each step (0-based feature indices).
using IndexVector = std::vector<Index>;

/// Coefficient increments, one per step.
using DeltaVector = Eigen::VectorXd;

struct InnerSolution {
  DeltaVector delta;
  /// sum_k alpha_k c(beta_k) of the materialized path.
  double objective = 0.0;
};

/// C(delta) = constant - 2 b'delta + delta' H delta for a fixed index vector.
struct NormalSystem {
  Eigen::MatrixXd H;
  Eigen::VectorXd b;
  double constant = 0.0;
};

namespace detail {

inline void check_indices(const SufficientStats& stats, std::span<const Index> iv) {
  for (Index i : iv) {
    if (i < 0 || i >= stats.dim()) {
      throw InvalidInput("index " + std::to_string(i) + " out of range for " +
                         std::to_string(stats.dim()) + " features");
    }
  }
}

/// Tail sums w_j = alpha_j + ... + alpha_K.
inline Eigen::VectorXd tail_sums(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd w(alpha.size());
  double acc = 0.0;
  for (Index j = alpha.size() - 1; j >= 0; --j) {
    acc += alpha(j);
    w(j) = acc;
  }
  return w;
}

inline void check_weights(const Eigen::VectorXd& alpha) {
  if (alpha.size() > 0 && (!alpha.allFinite() || alpha.minCoeff() < 0.0)) {
    throw InvalidInput("step weights must be finite and nonnegative");
  }
  if (alpha.size() > 0 && alpha.maxCoeff() <= 0.0) {
    throw InvalidInput("schedule assigns zero weight to every step");
  }
}

/// Weights divided by their maximum. Minimizers do not change; it keeps the
/// systems well scaled for very large or very small gamma.
inline Eigen::VectorXd normalized(const Eigen::VectorXd& alpha) { return alpha / alpha.maxCoeff(); }

/// Per-step variable scaling 1/sqrt(w_j) (1 where w_j = 0).
inline Eigen::VectorXd step_scaling(const Eigen::VectorXd& w) {
  Eigen::VectorXd s(w.size());
  for (Index j = 0; j < w.size(); ++j) s(j) = w(j) > 0.0 ? 1.0 / std::sqrt(w(j)) : 1.0;
  return s;
}

/// Diagonally scaled system H~ = S H S, b~ = S b.
inline NormalSystem scaled_system(const SufficientStats& stats, const Eigen::VectorXd& base_residual,
                                  std::span<const Index> iv, const Eigen::VectorXd& w,
                                  const Eigen::VectorXd& s) {
  const auto K = static_cast<Index>(iv.size());
  NormalSystem sys;
  sys.H.resize(K, K);
  sys.b.resize(K);
  const auto& G = stats.gram();
  for (Index j = 0; j < K; ++j) {
    for (Index l = 0; l <= j; ++l) {
      const double v = w(j) * s(j) * s(l) * G(iv[static_cast<std::size_t>(j)], iv[static_cast<std::size_t>(l)]);
      sys.H(j, l) = v;
      sys.H(l, j) = v;
    }
    sys.b(j) = w(j) * s(j) * base_residual(iv[static_cast<std::size_t>(j)]);
  }
  return sys;
}

}  // namespace detail

/// Builds H_jl = w_max(j,l) G_{i_j i_l}, b_j = w_j (g - G beta0)_{i_j} and the
/// constant (sum_k alpha_k) c(beta0).
inline NormalSystem build_normal_system(const SufficientStats& stats, const LinearModel& base,
                                        std::span<const Index> iv, const Eigen::VectorXd& alpha) {
  detail::check_indices(stats, iv);
  if (alpha.size() != static_cast<Index>(iv.size())) throw InvalidInput("weight count must equal path length");
  const Eigen::VectorXd w = detail::tail_sums(alpha);
  const Eigen::VectorXd r0 = stats.cross() - stats.gram() * base.coefficients();
  NormalSystem sys = detail::scaled_system(stats, r0, iv, w, Eigen::VectorXd::Ones(alpha.size()));
  sys.constant = alpha.sum() * cost(stats, base);
  return sys;
}

inline CoordinatePath to_path(const LinearModel& base, std::span<const Index> iv, const DeltaVector& delta) {
  if (delta.size() != static_cast<Index>(iv.size())) throw InvalidInput("delta length must equal index count");
  CoordinatePath path(base);
  Eigen::VectorXd beta = base.coefficients();
  for (std::size_t j = 0; j < iv.size(); ++j) {
    beta(iv[j]) += delta(static_cast<Index>(j));
    path.push_back({iv[j], beta(iv[j])});
  }
  return path;
}

/// Same, with the last step on each coordinate set to the endpoint value
/// itself so the path ends on `endpoint` bit for bit.
inline CoordinatePath to_path(const LinearModel& base, std::span<const Index> iv, const DeltaVector& delta,
                              const LinearModel& endpoint) {
  const CoordinatePath raw = to_path(base, iv, delta);
  std::vector<Step> steps = raw.steps();
  std::vector<bool> seen(static_cast<std::size_t>(base.size()), false);
  for (std::size_t j = steps.size(); j-- > 0;) {
    const auto c = static_cast<std::size_t>(steps[j].feature);
    if (!seen[c]) steps[j].value = endpoint[steps[j].feature];
    seen[c] = true;
  }
  return CoordinatePath(base, std::move(steps));
}

/// sum_k alpha_k c(beta0 + sum_{j<=k} delta_j e_{i_j}), evaluated step by step.
inline double path_objective(const SufficientStats& stats, const LinearModel& base, std::span<const Index> iv,
                             const DeltaVector& delta, const Eigen::VectorXd& alpha) {
  detail::check_indices(stats, iv);
  Eigen::VectorXd beta = base.coefficients();
  double total = 0.0;
  for (std::size_t j = 0; j < iv.size(); ++j) {
    beta(iv[j]) += delta(static_cast<Index>(j));
    total += alpha(static_cast<Index>(j)) * cost(stats, beta);
  }
  return total;
}

/// Incremental LDL' factorization of the scaled normal system, one step at a
/// time. Pushing step j costs O(j^2); the minimum of C over delta for the
/// current prefix is available after every push. Semidefinite pivots are
/// dropped (their Schur complement column is zero for a PSD matrix).
class PrefixFactorization {
 public:
  PrefixFactorization(const SufficientStats& stats, const LinearModel& base, const Eigen::VectorXd& alpha)
      : gram_(&stats.gram()), K_(alpha.size()) {
    detail::check_weights(alpha);
    const Eigen::VectorXd a = detail::normalized(alpha);
    scale_ = alpha.maxCoeff();
    const Eigen::VectorXd w = detail::tail_sums(a);
    root_w_ = w.cwiseSqrt();
    coupling_.resize(K_, K_);
    for (Index j = 0; j < K_; ++j) {
      for (Index l = 0; l <= j; ++l) {
        coupling_(j, l) = w(j) > 0.0 ? w(j) / (root_w_(j) * root_w_(l)) : 0.0;
      }
    }
    residual_ = stats.cross() - stats.gram() * base.coefficients();
    constant_ = a.sum() * cost(stats, base);
    pivot_tol_ = 1e-11 * std::max(stats.max_diagonal(), 1e-300);
    L_ = RowMajor::Zero(K_, K_);
    LD_ = RowMajor::Zero(K_, K_);
    D_.assign(static_cast<std::size_t>(K_), 0.0);
    inv_D_.assign(static_cast<std::size_t>(K_), 0.0);
    y_.assign(static_cast<std::size_t>(K_), 0.0);
    acc_.assign(static_cast<std::size_t>(K_) + 1, 0.0);
    idx_.reserve(static_cast<std::size_t>(K_));
  }

  Index depth() const { return static_cast<Index>(idx_.size()); }
  Index capacity() const { return K_; }

  void push(Index i) {
    const Index j = depth();
    const auto& G = *gram_;
    double* Lj = L_.row(j).data();
    double* LDj = LD_.row(j).data();
    for (Index l = 0; l < j; ++l) {
      double v = coupling_(j, l) * G(i, idx_[static_cast<std::size_t>(l)]);
      const double* LDl = LD_.row(l).data();
      for (Index m = 0; m < l; ++m) v -= Lj[m] * LDl[m];
      Lj[l] = v * inv_D_[l];
      LDj[l] = D_[l] > 0.0 ? v : 0.0;
    }
    double d = coupling_(j, j) * G(i, i);
    double y = root_w_(j) * residual_(i);
    for (Index m = 0; m < j; ++m) {
      d -= Lj[m] * LDj[m];
      y -= Lj[m] * y_[m];
    }
    if (d > pivot_tol_) {
      D_[j] = d;
      inv_D_[j] = 1.0 / d;
      y_[j] = y;
      acc_[j + 1] = acc_[j] + y * y * inv_D_[j];
    } else {
      D_[j] = 0.0;
      inv_D_[j] = 0.0;
      y_[j] = 0.0;
      acc_[j + 1] = acc_[j];
    }
    idx_.push_back(i);
  }

  void pop() { idx_.pop_back(); }

  /// min over delta of C once all K steps are pushed (steps past the current
  /// depth are treated as fixed at zero, i.e. only the pushed prefix moves).
  double objective() const { return scale_ * std::max(constant_ - acc_[static_cast<std::size_t>(depth())], 0.0); }

 private:
  const Eigen::MatrixXd* gram_;
  Index K_;
  double scale_ = 1.0;
  Eigen::VectorXd root_w_;
  Eigen::MatrixXd coupling_;
  Eigen::VectorXd residual_;
  double constant_ = 0.0;
  double pivot_tol_ = 0.0;
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor L_, LD_;
  std::vector<double> D_, inv_D_, y_, acc_;
  std::vector<Index> idx_;
};

/// Minimum of C(iv, .) without forming delta.
inline double free_objective(const SufficientStats& stats, const LinearModel& base, std::span<const Index> iv,
                             const Eigen::VectorXd& alpha) {
  if (iv.empty()) return 0.0;
  detail::check_indices(stats, iv);
  if (alpha.size() != static_cast<Index>(iv.size())) throw InvalidInput("weight count must equal path length");
  PrefixFactorization f(stats, base, alpha);
  for (Index i : iv) f.push(i);
  return f.objective();
}

/// Global minimizer of C(iv, .) with a free endpoint. The normal equations
/// H delta = b are solved in the scaled variables delta~ = delta / s; the
/// returned delta has minimum scaled norm when H is singular.
inline InnerSolution solve_free(const SufficientStats& stats, const LinearModel& base, std::span<const Index> iv,
                                const Eigen::VectorXd& alpha) {
  if (base.size() != stats.dim()) throw InvalidInput("base model dimension does not match statistics");
  detail::check_indices(stats, iv);
  if (alpha.size() != static_cast<Index>(iv.size())) throw InvalidInput("weight count must equal path length");
  if (iv.empty()) return {DeltaVector(), 0.0};
  detail::check_weights(alpha);

  const Eigen::VectorXd w = detail::tail_sums(detail::normalized(alpha));
  const Eigen::VectorXd s = detail::step_scaling(w);
  const Eigen::VectorXd r0 = stats.cross() - stats.gram() * base.coefficients();
  const NormalSystem sys = detail::scaled_system(stats, r0, iv, w, s);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.H);
  InnerSolution out;
  out.delta = s.cwiseProduct(cod.solve(sys.b));
  out.objective = path_objective(stats, base, iv, out.delta, alpha);
  return out;
}

inline InnerSolution solve_free(const SufficientStats& stats, const LinearModel& base, std::span<const Index> iv,
                                const WeightSchedule& schedule) {
  return solve_free(stats, base, iv, schedule.weights(iv.size()));
}

/// Minimizer of C(iv, .) subject to the last model equalling `target`.
/// Returns nullopt when some coordinate that must change never appears in iv.
inline std::optional<InnerSolution> solve_fixed_endpoint(const SufficientStats& stats, const LinearModel& base,
                                                         std::span<const Index> iv, const Eigen::VectorXd& alpha,
                                                         const LinearModel& target) {
  if (base.size() != stats.dim() || target.size() != stats.dim()) {
    throw InvalidInput("model dimension does not match statistics");
  }
  detail::check_indices(stats, iv);
  if (alpha.size() != static_cast<Index>(iv.size())) throw InvalidInput("weight count must equal path length");

  const Index d = stats.dim();
  const auto K = static_cast<Index>(iv.size());
  std::vector<Index> row_of(static_cast<std::size_t>(d), -1);
  Index m = 0;
  for (Index i : iv) {
    if (row_of[static_cast<std::size_t>(i)] < 0) row_of[static_cast<std::size_t>(i)] = m++;
  }
  for (Index c = 0; c < d; ++c) {
    if (row_of[static_cast<std::size_t>(c)] < 0 && target[c] != base[c]) return std::nullopt;
  }
  if (K == 0) return InnerSolution{DeltaVector(), 0.0};
  detail::check_weights(alpha);

  const Eigen::VectorXd w = detail::tail_sums(detail::normalized(alpha));
  const Eigen::VectorXd s = detail::step_scaling(w);
  const Eigen::VectorXd r0 = stats.cross() - stats.gram() * base.coefficients();
  const NormalSystem sys = detail::scaled_system(stats, r0, iv, w, s);

  // Stationarity H~ x - b~ + A~' mu = 0 with A~ = A S; feasibility A~ x = r.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(K + m, K + m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K + m);
  kkt.topLeftCorner(K, K) = sys.H;
  rhs.head(K) = sys.b;
  for (Index j = 0; j < K; ++j) {
    const Index r = row_of[static_cast<std::size_t>(iv[static_cast<std::size_t>(j)])];
    kkt(K + r, j) = s(j);
    kkt(j, K + r) = s(j);
  }
  for (Index c = 0; c < d; ++c) {
    const Index r = row_of[static_cast<std::size_t>(c)];
    if (r >= 0) rhs(K + r) = target[c] - base[c];
  }

  const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  InnerSolution out;
  out.delta = s.cwiseProduct(sol.head(K));

  // Land exactly on the target: the last step on each coordinate absorbs
  // round-off in the constraint.
  Eigen::VectorXd reached = base.coefficients();
  for (Index j = 0; j < K; ++j) reached(iv[static_cast<std::size_t>(j)]) += out.delta(j);
  for (Index j = K - 1; j >= 0; --j) {
    const Index c = iv[static_cast<std::size_t>(j)];
    if (reached(c) != target[c]) {
      const double fix = target[c] - reached(c);
      if (std::abs(fix) > 1e-6 * std::max(1.0, std::abs(target[c]))) {
        throw Error("endpoint-constrained inner solve failed to converge");
      }
      out.delta(j) += fix;
      reached(c) = target[c];
    }
  }
  out.objective = path_objective(stats, base, iv, out.delta, alpha);
  return out;
}

inline std::optional<InnerSolution> solve_fixed_endpoint(const SufficientStats& stats, const LinearModel& base,
                                                         std::span<const Index> iv, const WeightSchedule& schedule,
                                                         const LinearModel& target) {
  return solve_fixed_endpoint(stats, base, iv, schedule.weights(iv.size()), target);
}

struct GreedyStep {
  Index feature = 0;
  double value = 0.0;
  double cost = 0.0;
};

/// Best single-coordinate move from `current`: maximizes the decrease
/// (g_i - (G beta)_i)^2 / G_ii; ties go to the lowest index.
inline GreedyStep greedy_step(const SufficientStats& stats, const LinearModel& current) {
  if (current.size() != stats.dim()) throw InvalidInput("model dimension does not match statistics");
  const auto& G = stats.gram();
  const double tol = 1e-10 * stats.max_diagonal();
  const Eigen::VectorXd r = stats.cross() - G * current.coefficients();
  Index best = -1;
  double best_gain = -1.0;
  for (Index i = 0; i < stats.dim(); ++i) {
    if (!(G(i, i) > tol)) continue;
    const double gain = r(i) * r(i) / G(i, i);
    if (gain > best_gain) {
      best_gain = gain;
      best = i;
    }
  }
  if (best < 0) throw InvalidInput("every diagonal entry of the gram is zero; no coordinate can move");
  GreedyStep step;
  step.feature = best;
  step.value = current[best] + r(best) / G(best, best);
  Eigen::VectorXd next = current.coefficients();
  next(best) = step.value;
  step.cost = cost(stats, next);
  return step;
}

}  // namespace pathlens
