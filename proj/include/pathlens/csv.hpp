#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pathlens/errors.hpp"
#include "pathlens/regression.hpp"

namespace pathlens {

namespace detail {

/// RFC-4180 records: comma separated, optional double-quoted fields with ""
/// escapes, CRLF or LF line endings. Quoted fields may span lines.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw InvalidInput("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted) {
          throw InvalidInput("line " + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(ch);
    }
  }
  if (in_quotes) throw InvalidInput("unterminated quoted field at end of input");
  if (!field.empty() || field_was_quoted || !record.empty()) end_record();
  return records;
}

inline bool parse_real(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses CSV text with a mandatory header row; `target` names the response column.
inline Dataset parse_csv(std::string_view text, const std::string& target) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto records = detail::parse_csv_records(text);
  if (records.empty()) throw InvalidInput("CSV input is empty");
  const auto& header = records.front();
  detail::require_distinct(header);

  std::size_t target_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target) target_col = j;
  }
  if (target_col == header.size()) throw InvalidInput("target column '" + target + "' not found in header");
  if (header.size() < 2) throw InvalidInput("CSV needs at least one feature column besides the target");
  if (records.size() < 2) throw InvalidInput("CSV has a header but no data rows");

  const auto n = static_cast<Index>(records.size() - 1);
  const auto d = static_cast<Index>(header.size() - 1);
  Dataset ds;
  ds.features.resize(n, d);
  ds.target.resize(n);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != target_col) ds.feature_names.push_back(header[j]);
  }

  for (Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r) + 1];
    const std::size_t row_number = static_cast<std::size_t>(r) + 2;
    if (rec.size() != header.size()) {
      throw InvalidInput("row " + std::to_string(row_number) + ": expected " +
                         std::to_string(header.size()) + " fields, found " + std::to_string(rec.size()));
    }
    Index col = 0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      double value = 0.0;
      if (!detail::parse_real(rec[j], value)) {
        throw InvalidInput("row " + std::to_string(row_number) + ", column '" + header[j] +
                           "': cannot parse '" + rec[j] + "' as a finite real");
      }
      if (j == target_col) {
        ds.target(r) = value;
      } else {
        ds.features(r, col++) = value;
      }
    }
  }
  validate(ds);
  return ds;
}

inline Dataset load_csv(const std::string& path, const std::string& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open CSV file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), target);
}

}  // namespace pathlens
