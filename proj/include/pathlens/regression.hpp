#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pathlens/errors.hpp"

namespace pathlens {

using Index = Eigen::Index;

namespace detail {

inline std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

inline void require_distinct(const std::vector<std::string>& names) {
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      throw InvalidInput("duplicate feature name '" + name + "'");
    }
  }
}

}  // namespace detail

/// Design matrix plus response. Rows are observations.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd target;
  std::vector<std::string> feature_names;

  Index rows() const { return features.rows(); }
  Index cols() const { return features.cols(); }
};

inline void validate(const Dataset& ds) {
  if (ds.rows() < 1 || ds.cols() < 1) {
    throw InvalidInput("dataset needs at least one row and one feature column");
  }
  if (ds.target.size() != ds.rows()) {
    throw InvalidInput("target length " + std::to_string(ds.target.size()) +
                       " does not match row count " + std::to_string(ds.rows()));
  }
  if (static_cast<Index>(ds.feature_names.size()) != ds.cols()) {
    throw InvalidInput("feature name count does not match column count");
  }
  detail::require_distinct(ds.feature_names);
  if (!ds.features.allFinite() || !ds.target.allFinite()) {
    throw InvalidInput("dataset contains non-finite values");
  }
}

/// Per-column affine maps applied by standardize().
struct Scaling {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;

  /// Slopes on the raw scale for coefficients fitted on standardized data.
  Eigen::VectorXd raw_coefficients(const Eigen::VectorXd& standardized) const {
    return (standardized.array() * target_scale / feature_scale.array()).matrix();
  }

  /// Intercept on the raw scale that pairs with raw_coefficients().
  double raw_intercept(const Eigen::VectorXd& standardized) const {
    return target_mean - raw_coefficients(standardized).dot(feature_mean);
  }
};

/// Centers every column and scales it to unit population variance. The
/// target is transformed the same way, so models fit without intercept.
inline std::pair<Dataset, Scaling> standardize(const Dataset& ds) {
  validate(ds);
  const double n = static_cast<double>(ds.rows());
  Scaling scaling;
  scaling.feature_mean = ds.features.colwise().mean().transpose();
  scaling.feature_scale.resize(ds.cols());

  Dataset out;
  out.feature_names = ds.feature_names;
  out.features = ds.features.rowwise() - scaling.feature_mean.transpose();
  for (Index j = 0; j < ds.cols(); ++j) {
    const double sd = std::sqrt(out.features.col(j).squaredNorm() / n);
    if (!(sd > 0.0)) {
      throw InvalidInput("feature column '" + ds.feature_names[static_cast<std::size_t>(j)] +
                         "' has zero variance");
    }
    scaling.feature_scale(j) = sd;
    out.features.col(j) /= sd;
  }

  scaling.target_mean = ds.target.mean();
  out.target = ds.target.array() - scaling.target_mean;
  const double target_sd = std::sqrt(out.target.squaredNorm() / n);
  if (!(target_sd > 0.0)) throw InvalidInput("target column has zero variance");
  scaling.target_scale = target_sd;
  out.target /= target_sd;
  return {std::move(out), std::move(scaling)};
}

/// Coefficient vector over named features.
class LinearModel {
 public:
  LinearModel() = default;

  LinearModel(std::vector<std::string> names, Eigen::VectorXd coefficients)
      : names_(std::move(names)), coefficients_(std::move(coefficients)) {
    if (static_cast<Index>(names_.size()) != coefficients_.size()) {
      throw InvalidInput("model has " + std::to_string(coefficients_.size()) +
                         " coefficients but " + std::to_string(names_.size()) + " feature names");
    }
    if (!coefficients_.allFinite()) throw InvalidInput("model coefficients must be finite");
  }

  static LinearModel zeros(std::vector<std::string> names) {
    const auto d = static_cast<Index>(names.size());
    return LinearModel(std::move(names), Eigen::VectorXd::Zero(d));
  }

  Index size() const { return coefficients_.size(); }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  double operator[](Index i) const { return coefficients_(i); }

  void set(Index i, double value) {
    if (i < 0 || i >= size()) throw InvalidInput("coefficient index out of range");
    if (!std::isfinite(value)) throw InvalidInput("model coefficients must be finite");
    coefficients_(i) = value;
  }

  friend bool operator==(const LinearModel& a, const LinearModel& b) {
    return a.names_ == b.names_ && a.coefficients_ == b.coefficients_;
  }

 private:
  std::vector<std::string> names_;
  Eigen::VectorXd coefficients_;
};

/// Second moments of (X, y): every squared-error cost is a quadratic form in
/// these, so nothing downstream needs the raw rows.
class SufficientStats {
 public:
  SufficientStats(Eigen::MatrixXd gram, Eigen::VectorXd cross, double target_second_moment,
                  std::vector<std::string> names = {}, Index sample_count = 0)
      : gram_(std::move(gram)),
        cross_(std::move(cross)),
        tsm_(target_second_moment),
        names_(std::move(names)),
        sample_count_(sample_count) {
    const Index d = gram_.rows();
    if (d < 1 || gram_.cols() != d) throw InvalidInput("gram must be a non-empty square matrix");
    if (cross_.size() != d) throw InvalidInput("cross-moment length does not match gram");
    if (names_.empty()) names_ = detail::default_names(d);
    if (static_cast<Index>(names_.size()) != d) {
      throw InvalidInput("feature name count does not match gram dimension");
    }
    detail::require_distinct(names_);
    if (!gram_.allFinite() || !cross_.allFinite() || !std::isfinite(tsm_)) {
      throw InvalidInput("moments must be finite");
    }
    if (tsm_ < 0.0) throw InvalidInput("target second moment must be nonnegative");

    const double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
    if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidInput("gram matrix is not symmetric");
    }
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double max_ev = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -1e-8 * max_ev || (max_ev == 0.0 && ev.minCoeff() < 0.0)) {
      throw InvalidInput("gram matrix is not positive semidefinite (eigenvalue " +
                         std::to_string(ev.minCoeff()) + ")");
    }
    if (ev.minCoeff() < 0.0) {
      gram_ = eig.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
    }

    // The joint moment matrix [[G, g], [g', tsm]] must itself be PSD, i.e. the
    // least-squares residual cannot be negative.
    const Eigen::VectorXd beta = gram_.completeOrthogonalDecomposition().solve(cross_);
    const double residual = tsm_ - 2.0 * beta.dot(cross_) + beta.dot(gram_ * beta);
    const double grad = (gram_ * beta - cross_).norm();
    const double tol = 1e-8 * std::max({1.0, tsm_, std::abs(beta.dot(cross_))});
    if (residual < -tol || grad > 1e-6 * std::max(1.0, cross_.norm())) {
      throw InvalidInput("moments are inconsistent: target second moment is below the explained variance");
    }
  }

  Index dim() const { return gram_.rows(); }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& cross() const { return cross_; }
  double target_second_moment() const { return tsm_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  /// Zero when the statistics were given as population moments.
  Index sample_count() const { return sample_count_; }
  double max_diagonal() const { return gram_.diagonal().maxCoeff(); }

  /// Cost augmented with ridge_weight * |beta|^2, folded into the gram.
  SufficientStats with_ridge(double ridge_weight) const {
    if (!(ridge_weight >= 0.0)) throw InvalidInput("ridge weight must be nonnegative");
    Eigen::MatrixXd g = gram_;
    g.diagonal().array() += ridge_weight;
    return SufficientStats(std::move(g), cross_, tsm_, names_, sample_count_);
  }

  Index index_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InvalidInput("unknown feature '" + name + "'");
    return static_cast<Index>(it - names_.begin());
  }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd cross_;
  double tsm_;
  std::vector<std::string> names_;
  Index sample_count_;
};

/// G = X'X/n, g = X'y/n, tsm = y'y/n.
inline SufficientStats compute_stats(const Dataset& ds) {
  validate(ds);
  const double n = static_cast<double>(ds.rows());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(ds.cols(), ds.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(ds.features.transpose(), 1.0 / n);
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd cross = ds.features.transpose() * ds.target / n;
  return SufficientStats(std::move(gram), std::move(cross), ds.target.squaredNorm() / n,
                         ds.feature_names, ds.rows());
}

inline SufficientStats stats_from_moments(Eigen::MatrixXd gram, Eigen::VectorXd cross,
                                          double target_second_moment,
                                          std::vector<std::string> names = {}) {
  return SufficientStats(std::move(gram), std::move(cross), target_second_moment, std::move(names));
}

/// Mean squared error tsm - 2 b'g + b'Gb, clamped at zero.
inline double cost(const SufficientStats& stats, const Eigen::VectorXd& beta) {
  if (beta.size() != stats.dim()) {
    throw InvalidInput("model dimension " + std::to_string(beta.size()) +
                       " does not match statistics dimension " + std::to_string(stats.dim()));
  }
  const double c = stats.target_second_moment() - 2.0 * beta.dot(stats.cross()) +
                   beta.dot(stats.gram() * beta);
  return std::max(c, 0.0);
}

inline double cost(const SufficientStats& stats, const LinearModel& model) {
  return cost(stats, model.coefficients());
}

/// 2(G b - g).
inline Eigen::VectorXd cost_gradient(const SufficientStats& stats, const Eigen::VectorXd& beta) {
  if (beta.size() != stats.dim()) throw InvalidInput("model dimension mismatch");
  return 2.0 * (stats.gram() * beta - stats.cross());
}

/// Least-squares fit; minimum-norm when the gram is singular.
inline LinearModel ols(const SufficientStats& stats) {
  Eigen::VectorXd beta = stats.gram().completeOrthogonalDecomposition().solve(stats.cross());
  return LinearModel(stats.feature_names(), std::move(beta));
}

}  // namespace pathlens
