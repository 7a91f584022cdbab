#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtenv/bayesian_cart.hpp"
#include "dtenv/posterior.hpp"
#include "dtenv/randomized_ensemble.hpp"

// Experiment configuration: an INI file with the sections [experiment],
// [dataset], [randomized] and [bayesian]. Comments take whole lines starting
// with ';' or '#'. Unknown sections or keys are errors.

namespace dtenv {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Technique { Randomized, Bayesian, Both };
enum class DataSource { Synthetic, Csv, Registry };
enum class Preset { Desk, Paper };

inline const char* to_string(Technique t) {
  switch (t) {
    case Technique::Randomized: return "randomized";
    case Technique::Bayesian: return "bayesian";
    case Technique::Both: return "both";
  }
  return "?";
}

inline const char* to_string(DataSource s) {
  switch (s) {
    case DataSource::Synthetic: return "synthetic";
    case DataSource::Csv: return "csv";
    case DataSource::Registry: return "registry";
  }
  return "?";
}

inline Preset parse_preset(const std::string& s) {
  if (s == "desk") return Preset::Desk;
  if (s == "paper") return Preset::Paper;
  throw ConfigError("unknown preset '" + s + "' (expected desk or paper)");
}

struct DatasetConfig {
  DataSource source = DataSource::Synthetic;
  /// Training and test counts; registry datasets default to their published split.
  std::optional<std::size_t> train;
  std::optional<std::size_t> test;
  std::string path;
  /// Column name, or a 0-based index written as digits.
  std::string label_column = "class";
  std::string id;
};

struct ExperimentConfig {
  std::string name = "synthetic";
  DatasetConfig dataset;
  Technique technique = Technique::Both;
  std::size_t folds = 5;
  double p0 = 0.99;
  PosteriorMode envelope_mode = PosteriorMode::Vote;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool bayesian_cv = false;
  std::vector<double> p0_sweep;
  EnsembleConfig randomized;
  McmcConfig bayesian;
  /// Directory that relative dataset paths are resolved against.
  std::filesystem::path base_dir;

  bool runs_randomized() const { return technique != Technique::Bayesian; }
  bool runs_bayesian() const { return technique != Technique::Randomized; }

  std::filesystem::path resolved_path() const {
    const std::filesystem::path p(dataset.path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  void validate() const {
    if ((runs_randomized() || (runs_bayesian() && bayesian_cv)) && folds < 2)
      throw ConfigError("config: [experiment] folds must be at least 2 for cross-validated techniques");
    if (!(p0 > 0.0 && p0 <= 1.0)) throw ConfigError("config: [experiment] p0 must lie in (0, 1]");
    for (double p : p0_sweep)
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("config: [experiment] p0_sweep values must lie in (0, 1]");
    if (dataset.train && *dataset.train == 0) throw ConfigError("config: [dataset] train must be positive");
    if (dataset.test && *dataset.test == 0) throw ConfigError("config: [dataset] test must be positive");
    switch (dataset.source) {
      case DataSource::Synthetic: break;
      case DataSource::Csv:
        if (dataset.path.empty()) throw ConfigError("config: [dataset] path is required for csv source");
        if (!dataset.train || !dataset.test)
          throw ConfigError("config: [dataset] train and test are required for csv source");
        break;
      case DataSource::Registry:
        if (dataset.id.empty()) throw ConfigError("config: [dataset] id is required for registry source");
        break;
    }
    if (runs_randomized()) {
      if (randomized.n_trees == 0) throw ConfigError("config: [randomized] n_trees must be at least 1");
      if (randomized.top_k == 0) throw ConfigError("config: [randomized] top_k must be at least 1");
      if (randomized.min_leaf && *randomized.min_leaf == 0)
        throw ConfigError("config: [randomized] min_leaf must be at least 1");
    }
    if (runs_bayesian()) {
      try {
        bayesian.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: [bayesian] ") + e.what());
      }
    }
  }
};

inline void apply_preset(ExperimentConfig& config, Preset preset) {
  const bool desk = preset == Preset::Desk;
  config.bayesian.restarts = desk ? 10 : 50;
  config.bayesian.burn_in = desk ? 500 : 2000;
  config.bayesian.post_burn_in = desk ? 500 : 2000;
  config.randomized.n_trees = desk ? 50 : 200;
}

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <typename T>
T parse_number(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("config: " + where + ": cannot parse '" + s + "'");
  return value;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: " + where + ": expected true or false, got '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::string item;
  for (std::size_t start = 0; start <= text.size();) {
    const auto comma = text.find(',', start);
    item = trim(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(parse_number<double>(where, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

}  // namespace config_detail

/// Applies every key present in `in` on top of `config`.
inline void read_config(std::istream& in, ExperimentConfig& config) {
  using namespace config_detail;
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }

  using Setter = std::function<void(const std::string& where, const std::string& value)>;
  auto size_key = [](std::size_t& field) -> Setter {
    return [&field](const std::string& w, const std::string& v) { field = parse_number<std::size_t>(w, v); };
  };
  auto opt_size_key = [](std::optional<std::size_t>& field) -> Setter {
    return [&field](const std::string& w, const std::string& v) {
      if (trim(v).empty() || trim(v) == "auto")
        field.reset();
      else
        field = parse_number<std::size_t>(w, v);
    };
  };
  auto double_key = [](double& field) -> Setter {
    return [&field](const std::string& w, const std::string& v) { field = parse_number<double>(w, v); };
  };
  auto string_key = [](std::string& field) -> Setter {
    return [&field](const std::string&, const std::string& v) { field = trim(v); };
  };

  auto& ds = config.dataset;
  auto& rz = config.randomized;
  auto& by = config.bayesian;
  const std::map<std::string, std::map<std::string, Setter>> keys{
      {"experiment",
       {
           {"name", string_key(config.name)},
           {"technique",
            [&](const std::string& w, const std::string& v) {
              const auto s = trim(v);
              if (s == "randomized") config.technique = Technique::Randomized;
              else if (s == "bayesian") config.technique = Technique::Bayesian;
              else if (s == "both") config.technique = Technique::Both;
              else throw ConfigError("config: " + w + ": expected randomized, bayesian or both, got '" + s + "'");
            }},
           {"folds", size_key(config.folds)},
           {"p0", double_key(config.p0)},
           {"envelope_mode",
            [&](const std::string& w, const std::string& v) {
              try {
                config.envelope_mode = parse_posterior_mode(trim(v));
              } catch (const std::invalid_argument& e) {
                throw ConfigError("config: " + w + ": " + e.what());
              }
            }},
           {"seed", [&](const std::string& w, const std::string& v) { config.seed = parse_number<std::uint64_t>(w, v); }},
           {"threads", [&](const std::string& w, const std::string& v) { config.threads = parse_number<unsigned>(w, v); }},
           {"bayesian_cv", [&](const std::string& w, const std::string& v) { config.bayesian_cv = parse_bool(w, v); }},
           {"p0_sweep", [&](const std::string& w, const std::string& v) { config.p0_sweep = parse_list(w, v); }},
       }},
      {"dataset",
       {
           {"source",
            [&](const std::string& w, const std::string& v) {
              const auto s = trim(v);
              if (s == "synthetic") ds.source = DataSource::Synthetic;
              else if (s == "csv") ds.source = DataSource::Csv;
              else if (s == "registry") ds.source = DataSource::Registry;
              else throw ConfigError("config: " + w + ": expected synthetic, csv or registry, got '" + s + "'");
            }},
           {"train", opt_size_key(ds.train)},
           {"test", opt_size_key(ds.test)},
           {"path", string_key(ds.path)},
           {"label_column", string_key(ds.label_column)},
           {"id", string_key(ds.id)},
       }},
      {"randomized",
       {
           {"n_trees", size_key(rz.n_trees)},
           {"min_leaf", opt_size_key(rz.min_leaf)},
           {"top_k", size_key(rz.top_k)},
           {"many_examples_threshold", size_key(rz.many_examples_threshold)},
       }},
      {"bayesian",
       {
           {"restarts", size_key(by.restarts)},
           {"burn_in", size_key(by.burn_in)},
           {"post_burn_in", size_key(by.post_burn_in)},
           {"max_leaves", size_key(by.max_leaves)},
           {"thinning", size_key(by.thinning)},
           {"alpha", double_key(by.alpha)},
           {"move_probs",
            [&](const std::string& w, const std::string& v) {
              const auto p = parse_list(w, v);
              if (p.size() != 4) throw ConfigError("config: " + w + ": expected four probabilities");
              by.move_probs = {p[0], p[1], p[2], p[3]};
            }},
       }},
  };

  for (const auto& [section, body] : tree) {
    const auto s = keys.find(section);
    if (s == keys.end()) {
      if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const auto k = s->second.find(key);
      if (k == s->second.end()) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      k->second("[" + section + "] " + key, value.data());
    }
  }
}

inline ExperimentConfig parse_config(std::istream& in, std::filesystem::path base_dir = {}) {
  ExperimentConfig config;
  config.base_dir = std::move(base_dir);
  read_config(in, config);
  return config;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in, path.parent_path());
}

/// Resolved configuration in the input format.
inline void write_config(std::ostream& out, const ExperimentConfig& c) {
  using config_detail::format_double;
  using config_detail::format_list;
  auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("auto"); };
  const auto& b = c.bayesian;
  auto kv = [](const std::string& key, const auto& value) {
    std::ostringstream os;
    os << value;
    return os.str().empty() ? key + " =\n" : key + " = " + os.str() + "\n";
  };
  out << "[experiment]\n"
      << kv("name", c.name)
      << kv("technique", to_string(c.technique))
      << kv("folds", c.folds)
      << kv("p0", format_double(c.p0))
      << kv("envelope_mode", to_string(c.envelope_mode))
      << kv("seed", c.seed)
      << kv("threads", c.threads)
      << kv("bayesian_cv", c.bayesian_cv ? "true" : "false")
      << kv("p0_sweep", format_list(c.p0_sweep))
      << "\n[dataset]\n"
      << kv("source", to_string(c.dataset.source))
      << kv("train", opt(c.dataset.train))
      << kv("test", opt(c.dataset.test))
      << kv("path", c.dataset.path)
      << kv("label_column", c.dataset.label_column)
      << kv("id", c.dataset.id)
      << "\n[randomized]\n"
      << kv("n_trees", c.randomized.n_trees)
      << kv("min_leaf", opt(c.randomized.min_leaf))
      << kv("top_k", c.randomized.top_k)
      << kv("many_examples_threshold", c.randomized.many_examples_threshold)
      << "\n[bayesian]\n"
      << kv("restarts", b.restarts)
      << kv("burn_in", b.burn_in)
      << kv("post_burn_in", b.post_burn_in)
      << kv("max_leaves", b.max_leaves)
      << kv("thinning", b.thinning)
      << kv("alpha", format_double(b.alpha))
      << kv("move_probs", format_list({b.move_probs.birth, b.move_probs.death, b.move_probs.change_variable,
                                       b.move_probs.change_rule}));
}

}  // namespace dtenv
