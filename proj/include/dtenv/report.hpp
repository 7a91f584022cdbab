#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtenv/experiment.hpp"

namespace dtenv {

enum class ReportFormat { Csv, Markdown };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw std::invalid_argument("unknown report format '" + s + "' (expected csv or markdown)");
}

/// Fixed-point text with `decimals` digits.
inline std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

inline std::string percent(double fraction) { return fixed(100.0 * fraction, 2); }

namespace report_detail {

inline std::string with_width(double rate, std::optional<double> width) {
  return width ? percent(rate) + "±" + percent(*width) : percent(rate);
}

inline std::string move_line(const ChainStats& s) {
  std::string out;
  for (std::size_t k = 0; k < kNumMoveKinds; ++k) {
    const double rate = s.proposed[k] ? static_cast<double>(s.accepted[k]) / static_cast<double>(s.proposed[k]) : 0.0;
    out += std::string(k ? ", " : "") + to_string(static_cast<MoveKind>(k)) + " " + std::to_string(s.accepted[k]) +
           "/" + std::to_string(s.proposed[k]) + " (" + percent(rate) + "%)";
  }
  return out;
}

}  // namespace report_detail

// CSV layout: one summary row per technique (fold = "all") followed by its
// per-fold rows. Rates are percentages with two decimals; cells without a
// value are empty.
inline const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> columns{
      "dataset",         "technique",        "fold",           "size_mean",       "size_std",
      "accuracy",        "correct",          "uncertain",      "incorrect",       "accuracy_2sigma",
      "correct_2sigma",  "uncertain_2sigma", "incorrect_2sigma", "single_accuracy", "single_2sigma"};
  return columns;
}

inline void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& t : report.techniques) {
    const auto& r = t.envelope.rates;
    out << report.dataset << ',' << to_string(t.technique) << ",all," << fixed(t.size.mean, 2) << ','
        << fixed(t.size.std, 2) << ',' << percent(r.accuracy) << ',' << percent(r.correct) << ','
        << percent(r.uncertain) << ',' << percent(r.incorrect) << ',';
    if (t.has_folds()) {
      const auto& w = t.envelope.two_sigma;
      out << percent(w.accuracy) << ',' << percent(w.correct) << ',' << percent(w.uncertain) << ','
          << percent(w.incorrect) << ',';
    } else {
      out << ",,,,";
    }
    if (t.best_single)
      out << percent(t.best_single->first) << ',' << percent(t.best_single->second);
    else
      out << ',';
    out << '\n';
    for (const auto& f : t.folds) {
      out << report.dataset << ',' << to_string(t.technique) << ',' << f.fold << ',' << fixed(f.size.mean, 2) << ','
          << fixed(f.size.std, 2) << ',' << percent(f.rates.accuracy) << ',' << percent(f.rates.correct) << ','
          << percent(f.rates.uncertain) << ',' << percent(f.rates.incorrect) << ",,,,,";
      if (f.best_single_test_accuracy) out << percent(*f.best_single_test_accuracy);
      out << ",\n";
    }
  }
}

inline void write_report_markdown(std::ostream& out, const ExperimentReport& report) {
  using report_detail::with_width;
  const auto& c = report.config;
  out << "# Experiment report: " << report.dataset << "\n\n"
      << "| Data | C | m | train | test | seed | p0 | envelope mode |\n"
      << "|---|---|---|---|---|---|---|---|\n"
      << "| " << report.dataset << " | " << report.num_classes << " | " << report.num_features << " | "
      << report.train_size << " | " << report.test_size << " | " << c.seed << " | " << config_detail::format_double(c.p0)
      << " | " << to_string(c.envelope_mode) << " |\n\n";

  out << "## Results\n\n"
      << "| Data | Technique | DT size | Perform, % | Correct, % | Uncertain, % | Incorrect, % | Single DT perform, % |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& t : report.techniques) {
    const auto& r = t.envelope.rates;
    const auto& w = t.envelope.two_sigma;
    const bool folds = t.has_folds();
    auto width = [&](double v) { return folds ? std::optional<double>(v) : std::nullopt; };
    out << "| " << report.dataset << " | " << to_string(t.technique) << " | " << fixed(t.size.mean, 1) << "±"
        << fixed(t.size.std, 1) << " | " << with_width(r.accuracy, width(w.accuracy)) << " | "
        << with_width(r.correct, width(w.correct)) << " | " << with_width(r.uncertain, width(w.uncertain)) << " | "
        << with_width(r.incorrect, width(w.incorrect)) << " | "
        << (t.best_single ? with_width(t.best_single->first, t.best_single->second) : std::string("-")) << " |\n";
  }

  for (const auto& t : report.techniques) {
    if (!t.has_folds()) continue;
    out << "\n## Folds: " << to_string(t.technique) << "\n\n"
        << "| Fold | train | validation | DT size | Perform, % | Correct, % | Uncertain, % | Incorrect, % | Single DT "
           "perform, % |\n"
        << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& f : t.folds)
      out << "| " << f.fold << " | " << f.train_size << " | " << f.validation_size << " | " << fixed(f.size.mean, 1)
          << "±" << fixed(f.size.std, 1) << " | " << percent(f.rates.accuracy) << " | " << percent(f.rates.correct)
          << " | " << percent(f.rates.uncertain) << " | " << percent(f.rates.incorrect) << " | "
          << (f.best_single_test_accuracy ? percent(*f.best_single_test_accuracy) : std::string("-")) << " |\n";
  }

  if (!c.p0_sweep.empty()) {
    out << "\n## Confidence sweep\n\n"
        << "| Technique | p0 | Correct, % | Uncertain, % | Incorrect, % |\n"
        << "|---|---|---|---|---|\n";
    for (const auto& t : report.techniques)
      for (const auto& [p0, r] : t.sweep)
        out << "| " << to_string(t.technique) << " | " << config_detail::format_double(p0) << " | " << percent(r.correct)
            << " | " << percent(r.uncertain) << " | " << percent(r.incorrect) << " |\n";
  }

  out << "\n## Run metadata\n\n";
  for (const auto& t : report.techniques) {
    out << "- " << to_string(t.technique) << ": " << t.models
        << (t.technique == Technique::Bayesian ? " retained samples" : " trees grown");
    if (t.chain_stats) out << "; accepted moves: " << report_detail::move_line(*t.chain_stats);
    out << '\n';
  }

  out << "\n## Configuration\n\n```ini\n";
  write_config(out, c);
  out << "```\n";
}

inline std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::Csv)
    write_report_csv(os, report);
  else
    write_report_markdown(os, report);
  return os.str();
}

}  // namespace dtenv
