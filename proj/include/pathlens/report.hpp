#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "pathlens/path.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  // "-0.0000" reads as a sign error in tables.
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

/// Step-by-step table of a path. One column per feature that is nonzero in
/// the base or touched by a step. A cell holds the new value on the step
/// that sets it, "|" while a set value carries over and "-" while the
/// coefficient is still zero.
inline std::string render_path_table(const SufficientStats& stats, const CoordinatePath& path, int precision = 4) {
  const auto& names = stats.feature_names();
  const auto& base = path.base().coefficients();
  std::vector<Index> cols;
  for (Index i = 0; i < stats.dim(); ++i) {
    const bool touched = std::any_of(path.steps().begin(), path.steps().end(),
                                     [&](const Step& s) { return s.feature == i; });
    if (touched || base(i) != 0.0) cols.push_back(i);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"step"};
  for (Index c : cols) header.push_back(names[static_cast<std::size_t>(c)]);
  header.push_back("MSE");
  rows.push_back(header);

  std::vector<bool> set(static_cast<std::size_t>(stats.dim()), false);
  Eigen::VectorXd beta = base;
  std::vector<std::string> row{"0"};
  for (Index c : cols) {
    set[static_cast<std::size_t>(c)] = base(c) != 0.0;
    row.push_back(base(c) != 0.0 ? fixed(base(c), precision) : "-");
  }
  row.push_back(fixed(cost(stats, beta), precision));
  rows.push_back(row);

  std::size_t k = 0;
  for (const auto& s : path.steps()) {
    beta(s.feature) = s.value;
    row.assign(1, std::to_string(++k));
    for (Index c : cols) {
      if (c == s.feature) {
        row.push_back(fixed(s.value, precision));
        set[static_cast<std::size_t>(c)] = true;
      } else {
        row.push_back(set[static_cast<std::size_t>(c)] ? "|" : "-");
      }
    }
    row.push_back(fixed(cost(stats, beta), precision));
    rows.push_back(row);
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += "  ";
      out += std::string(width[i] - r[i].size(), ' ') + r[i];
    }
    out += "\n";
  }
  return out;
}

}  // namespace pathlens
