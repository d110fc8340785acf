#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pathlens/csv.hpp"
#include "pathlens/errors.hpp"
#include "pathlens/pareto.hpp"
#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

using json = nlohmann::ordered_json;

namespace detail {

inline const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("JSON is missing field '") + key + "'");
  return j.at(key);
}

inline double real(const json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + " must be a number");
  return j.get<double>();
}

inline Eigen::VectorXd real_vector(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = real(j[i], what);
  return v;
}

inline std::vector<std::string> string_list(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw InvalidInput(std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open JSON file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("invalid JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

/// Two-space indented, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Moments: {"gram": [[...]], "cross": [...], "tsm": x, "names": [...]}

inline SufficientStats moments_from_json(const json& j) {
  const json& rows = detail::member(j, "gram");
  if (!rows.is_array() || rows.empty()) throw InvalidInput("gram must be a non-empty array of rows");
  const auto d = static_cast<Index>(rows.size());
  Eigen::MatrixXd gram(d, d);
  for (Index r = 0; r < d; ++r) {
    const Eigen::VectorXd row = detail::real_vector(rows[static_cast<std::size_t>(r)], "gram row");
    if (row.size() != d) throw InvalidInput("gram must be square");
    gram.row(r) = row.transpose();
  }
  Eigen::VectorXd cross = detail::real_vector(detail::member(j, "cross"), "cross");
  const double tsm = detail::real(detail::member(j, "tsm"), "tsm");
  std::vector<std::string> names;
  if (j.contains("names")) names = detail::string_list(j.at("names"), "names");
  return stats_from_moments(std::move(gram), std::move(cross), tsm, std::move(names));
}

inline json moments_to_json(const SufficientStats& stats) {
  json rows = json::array();
  for (Index r = 0; r < stats.dim(); ++r) rows.push_back(detail::vector_json(stats.gram().row(r).transpose()));
  json j;
  j["gram"] = rows;
  j["cross"] = detail::vector_json(stats.cross());
  j["tsm"] = stats.target_second_moment();
  j["names"] = stats.feature_names();
  return j;
}

// Models: {"features": [...], "coefficients": [...]}

inline json model_to_json(const LinearModel& m) {
  json j;
  j["features"] = m.feature_names();
  j["coefficients"] = detail::vector_json(m.coefficients());
  return j;
}

/// Reads a model and maps it onto `names`; features missing from the file
/// get coefficient 0, unknown features are an error.
inline LinearModel model_from_json(const json& j, const std::vector<std::string>& names) {
  const auto features = detail::string_list(detail::member(j, "features"), "features");
  const Eigen::VectorXd coef = detail::real_vector(detail::member(j, "coefficients"), "coefficients");
  if (static_cast<Index>(features.size()) != coef.size()) {
    throw InvalidInput("model has " + std::to_string(features.size()) + " features but " +
                       std::to_string(coef.size()) + " coefficients");
  }
  detail::require_distinct(features);
  LinearModel m = LinearModel::zeros(names);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto it = std::find(names.begin(), names.end(), features[i]);
    if (it == names.end()) throw InvalidInput("model feature '" + features[i] + "' is not in the data");
    m.set(static_cast<Index>(it - names.begin()), coef(static_cast<Index>(i)));
  }
  return m;
}

// Paths: {"base": [...], "steps": [{"feature": name, "value": v}, ...]}

inline json path_to_json(const CoordinatePath& path) {
  json j;
  j["base"] = detail::vector_json(path.base().coefficients());
  json steps = json::array();
  for (const auto& s : path.steps()) {
    json step;
    step["feature"] = path.base().feature_names()[static_cast<std::size_t>(s.feature)];
    step["value"] = s.value;
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j;
}

inline CoordinatePath path_from_json(const json& j, const std::vector<std::string>& names) {
  const Eigen::VectorXd base = detail::real_vector(detail::member(j, "base"), "base");
  if (base.size() != static_cast<Index>(names.size())) {
    throw InvalidInput("path base has " + std::to_string(base.size()) + " coefficients, expected " +
                       std::to_string(names.size()));
  }
  CoordinatePath path{LinearModel(names, base)};
  const json& steps = detail::member(j, "steps");
  if (!steps.is_array()) throw InvalidInput("steps must be an array");
  for (const auto& s : steps) {
    const json& f = detail::member(s, "feature");
    if (!f.is_string()) throw InvalidInput("step feature must be a feature name");
    const auto it = std::find(names.begin(), names.end(), f.get<std::string>());
    if (it == names.end()) throw InvalidInput("step feature '" + f.get<std::string>() + "' is not in the data");
    path.push_back({static_cast<Index>(it - names.begin()), detail::real(detail::member(s, "value"), "step value")});
  }
  return path;
}

// Front reports.

inline json front_to_json(const FrontReport& report) {
  json meta;
  meta["schedule"] = report.schedule;
  meta["lambda_grid"] = report.lambda_grid;
  meta["K_max"] = report.K_max;
  meta["solver"] = to_string(report.solver);
  json points = json::array();
  for (const auto& p : report.points) {
    json jp;
    jp["lambda"] = p.lambda;
    jp["K"] = p.K;
    jp["cost"] = p.cost;
    jp["interp_loss"] = p.interp_loss;
    jp["model"] = model_to_json(p.model);
    jp["path"] = path_to_json(p.path);
    points.push_back(std::move(jp));
  }
  json j;
  j["metadata"] = std::move(meta);
  j["points"] = std::move(points);
  return j;
}

/// Header "interp_loss,cost,K,lambda", one row per front point.
inline std::string front_to_csv(const FrontReport& report) {
  std::string out = "interp_loss,cost,K,lambda\n";
  char buf[160];
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g\n", p.interp_loss, p.cost, p.K, p.lambda);
    out += buf;
  }
  return out;
}

struct FrontTable {
  std::vector<double> interp_loss;
  std::vector<double> cost;
};

/// Reads the interp_loss and cost columns of a front CSV.
inline FrontTable front_from_csv(std::string_view text) {
  const auto records = detail::parse_csv_records(text);
  if (records.empty()) throw InvalidInput("front CSV is empty");
  const auto& header = records.front();
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InvalidInput("front CSV has no '" + name + "' column");
  };
  const std::size_t li = column("interp_loss");
  const std::size_t ci = column("cost");
  FrontTable table;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    double loss = 0.0;
    double c = 0.0;
    if (rec.size() != header.size() || !detail::parse_real(rec[li], loss) || !detail::parse_real(rec[ci], c)) {
      throw InvalidInput("front CSV row " + std::to_string(r + 1) + " is malformed");
    }
    table.interp_loss.push_back(loss);
    table.cost.push_back(c);
  }
  return table;
}

}  // namespace pathlens
