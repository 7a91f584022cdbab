#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Known benchmark datasets: where they live, their shape, and how the raw
// files map onto the CSV schema (feature columns, then `class`).

namespace dtenv {

/// Converts the downloaded files, in URL order, to CSV text.
using RawConverter = std::string (*)(const std::vector<std::string>& raw);

struct DatasetInfo {
  std::string_view id;
  std::string_view title;
  std::vector<std::string> urls;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  /// SHA-256 of the concatenated raw files; empty when not pinned.
  std::string_view sha256;
  RawConverter convert = nullptr;
};

namespace registry_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream is{std::string(line)};
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (!trim(line).empty()) out.push_back(trim(line));
  return out;
}

inline std::string header(std::size_t features) {
  std::string h;
  for (std::size_t j = 0; j < features; ++j) h += "f" + std::to_string(j + 1) + ",";
  return h + "class\n";
}

// Rows given as token lists; `label` indexes the class token, `drop` lists
// other columns to discard.
inline std::string emit(const std::vector<std::vector<std::string>>& rows, std::size_t label,
                        std::vector<std::size_t> drop = {}) {
  if (rows.empty()) throw std::runtime_error("converter: no data rows");
  drop.push_back(label);
  const std::size_t width = rows.front().size();
  std::string out = header(width - drop.size());
  for (const auto& r : rows) {
    if (r.size() != width) throw std::runtime_error("converter: ragged raw row");
    for (std::size_t j = 0; j < width; ++j)
      if (std::ranges::find(drop, j) == drop.end()) out += r[j] + ",";
    out += r[label] + "\n";
  }
  return out;
}

inline std::vector<std::vector<std::string>> rows_of(const std::vector<std::string>& raw, char delim) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& text : raw)
    for (const auto& line : lines_of(text)) rows.push_back(split(line, delim));
  return rows;
}

inline std::string convert_label_last(const std::vector<std::string>& raw) {
  auto rows = rows_of(raw, ',');
  return emit(rows, rows.front().size() - 1);
}

// Second attribute is constant zero.
inline std::string convert_ionosphere(const std::vector<std::string>& raw) {
  auto rows = rows_of(raw, ',');
  return emit(rows, rows.front().size() - 1, {1});
}

// Drops the sample id and the 16 records with missing values.
inline std::string convert_wisconsin(const std::vector<std::string>& raw) {
  auto rows = rows_of(raw, ',');
  std::erase_if(rows, [](const auto& r) { return std::ranges::find(r, std::string("?")) != r.end(); });
  return emit(rows, rows.front().size() - 1, {0});
}

// Skips the descriptive preamble up to the attribute-name line.
inline std::string convert_image(const std::vector<std::string>& raw) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& text : raw) {
    bool in_data = false;
    for (const auto& line : lines_of(text)) {
      if (!in_data) {
        in_data = line.starts_with("REGION-CENTROID-COL");
        continue;
      }
      rows.push_back(split(line, ','));
    }
  }
  return emit(rows, 0);
}

// y = 1, n = 0, unrecorded vote = 0.5.
inline std::string convert_votes(const std::vector<std::string>& raw) {
  auto rows = rows_of(raw, ',');
  for (auto& r : rows)
    for (std::size_t j = 1; j < r.size(); ++j) r[j] = r[j] == "y" ? "1" : r[j] == "n" ? "0" : "0.5";
  return emit(rows, 0);
}

inline std::string convert_vehicle(const std::vector<std::string>& raw) {
  auto rows = rows_of(raw, ' ');
  return emit(rows, rows.front().size() - 1);
}

}  // namespace registry_detail

inline const std::vector<DatasetInfo>& dataset_registry() {
  using namespace registry_detail;
  const auto url = [](std::string_view path) {
    return "https://archive.ics.uci.edu/ml/machine-learning-databases/" + std::string(path);
  };
  static const std::vector<DatasetInfo> registry{
      {"ionosphere", "Ionosphere", {url("ionosphere/ionosphere.data")}, 2, 33, 200, 151, {}, convert_ionosphere},
      {"wisconsin",
       "Wisconsin breast cancer",
       {url("breast-cancer-wisconsin/breast-cancer-wisconsin.data")},
       2,
       9,
       455,
       228,
       {},
       convert_wisconsin},
      {"image",
       "Image segmentation",
       {url("image/segmentation.data"), url("image/segmentation.test")},
       7,
       19,
       210,
       2100,
       {},
       convert_image},
      {"votes", "Congressional votes", {url("voting-records/house-votes-84.data")}, 2, 16, 391, 44, {}, convert_votes},
      {"sonar",
       "Sonar",
       {url("undocumented/connectionist-bench/sonar/sonar.all-data")},
       2,
       60,
       138,
       70,
       {},
       convert_label_last},
      {"vehicle",
       "Vehicle silhouettes",
       {url("statlog/vehicle/xaa.dat"), url("statlog/vehicle/xab.dat"), url("statlog/vehicle/xac.dat"),
        url("statlog/vehicle/xad.dat"), url("statlog/vehicle/xae.dat"), url("statlog/vehicle/xaf.dat"),
        url("statlog/vehicle/xag.dat"), url("statlog/vehicle/xah.dat"), url("statlog/vehicle/xai.dat")},
       4,
       18,
       564,
       282,
       {},
       convert_vehicle},
      {"pima",
       "Pima Indians diabetes",
       {"https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv"},
       2,
       8,
       512,
       256,
       {},
       convert_label_last},
  };
  return registry;
}

inline std::string known_dataset_ids() {
  std::string out;
  for (const auto& d : dataset_registry()) out += (out.empty() ? "" : ", ") + std::string(d.id);
  return out;
}

inline const DatasetInfo& find_dataset(std::string_view id) {
  for (const auto& d : dataset_registry())
    if (d.id == id) return d;
  throw std::invalid_argument("unknown dataset '" + std::string(id) + "'; known: " + known_dataset_ids());
}

inline constexpr const char* kCacheDirEnv = "DTENV_CACHE_DIR";

/// $DTENV_CACHE_DIR, else $XDG_CACHE_HOME/dtenv, else ~/.cache/dtenv.
inline std::filesystem::path cache_dir() {
  if (const char* dir = std::getenv(kCacheDirEnv); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "dtenv";
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "dtenv";
  return std::filesystem::temp_directory_path() / "dtenv-cache";
}

inline std::filesystem::path cached_csv_path(std::string_view id, const std::filesystem::path& dir = cache_dir()) {
  return dir / (std::string(id) + ".csv");
}

}  // namespace dtenv
