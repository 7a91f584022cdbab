#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dtenv/dataset.hpp"

namespace dtenv {

/// Raised for malformed input files. `row` is 1-based over data rows
/// (header excluded), `column` is 0-based; either may be npos when unknown.
class IngestError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  IngestError(const std::string& what, std::size_t row = npos, std::size_t column = npos)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row != npos) out += " at row " + std::to_string(row);
    if (column != npos) out += (row != npos ? ", column " : " at column ") + std::to_string(column);
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

/// Label column chosen by header name or 0-based index.
using ColumnSelector = std::variant<std::string, std::size_t>;

namespace csv_detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace csv_detail

inline Dataset parse_csv(std::istream& in, const ColumnSelector& label_column) {
  using namespace csv_detail;
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty CSV input: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line);

  std::size_t label_idx = 0;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw IngestError("label column '" + *name + "' not found in header");
    label_idx = static_cast<std::size_t>(it - header.begin());
  } else {
    label_idx = std::get<std::size_t>(label_column);
    if (label_idx >= header.size())
      throw IngestError("label column index " + std::to_string(label_idx) + " out of range");
  }
  if (header.size() < 2) throw IngestError("CSV needs a label column and at least one feature column");

  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != label_idx) feature_names.push_back(header[j]);

  std::vector<double> features;
  std::vector<std::size_t> labels;
  std::map<std::string, std::size_t> label_ids;
  std::vector<std::string> class_names;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split_record(line);
    if (fields.size() != header.size())
      throw IngestError("expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        row);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_idx) {
        if (fields[j].empty()) throw IngestError("missing label", row, j);
        auto [it, inserted] = label_ids.emplace(fields[j], class_names.size());
        if (inserted) class_names.push_back(fields[j]);
        labels.push_back(it->second);
      } else {
        double v = 0.0;
        if (!parse_real(fields[j], v))
          throw IngestError("unparsable value '" + fields[j] + "'", row, j);
        features.push_back(v);
      }
    }
  }
  if (labels.empty()) throw IngestError("CSV has no data rows");
  if (class_names.size() < 2)
    throw IngestError("CSV has a single class; classification is undefined");

  const std::size_t num_features = feature_names.size();
  Dataset data(std::move(features), std::move(labels), num_features, class_names.size(), std::move(feature_names));
  data.set_class_names(std::move(class_names));
  return data;
}

/// Reads a headed CSV; labels are re-encoded densely in first-appearance order.
inline Dataset load_csv(const std::string& path, const ColumnSelector& label_column) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return parse_csv(in, label_column);
}

/// Writes features then a trailing `class` column. Values use the shortest
/// round-trip representation.
inline void write_csv(std::ostream& out, const Dataset& data) {
  for (const auto& name : data.feature_names()) out << name << ',';
  out << "class\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, ptr - buf);
      out << ',';
    }
    const auto& names = data.class_names();
    if (names.empty())
      out << data.label(i);
    else
      out << names[data.label(i)];
    out << '\n';
  }
}

inline void save_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, data);
}

}  // namespace dtenv
