#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/eval.hpp"
#include "osir/text.hpp"

namespace osir {

namespace detail {

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("n/a");
}

inline std::optional<double> parse_optional(const std::string& tok, const std::string& where) {
  if (tok == "n/a") return std::nullopt;
  return parse_double(tok, where);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) fail(path.string() + ": empty file");
  return rows;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical reruns
  if (!out) fail("cannot write " + path.string());
  return out;
}

}  // namespace detail

// threshold formatted for human-facing column names / summary lines
inline std::string threshold_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

// ---------------------------------------------------------------------------
// Writers: closed.csv, sweep.csv, curve.csv, summary.txt

inline void write_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);

  {
    std::ofstream out = detail::open_out(dir / "closed.csv");
    out << "classifier,closed_accuracy,test_size\n";
    for (const ClassifierEvaluation& cls : report.classifiers)
      out << cls.name << ',' << detail::format_double(cls.closed_accuracy) << ','
          << report.test_size << '\n';
  }

  {
    std::ofstream out = detail::open_out(dir / "sweep.csv");
    out << "classifier,threshold,open_accuracy,known_accuracy,unknown_accuracy,unknown_count\n";
    for (const ClassifierEvaluation& cls : report.classifiers)
      for (const OpenSetAccuracy& row : cls.sweep)
        out << cls.name << ',' << detail::format_double(row.threshold) << ','
            << detail::format_double(row.open) << ',' << detail::format_optional(row.known) << ','
            << detail::format_optional(row.unknown) << ',' << row.n_unknown << '\n';
  }

  {
    std::ofstream out = detail::open_out(dir / "curve.csv");
    out << "weight";
    for (const ClassifierEvaluation& cls : report.classifiers)
      for (const OpenSetAccuracy& row : cls.sweep)
        out << ",perceived_" << cls.name << '_' << threshold_tag(row.threshold);
    out << '\n';
    for (std::size_t i = 0; i < report.weights.size(); ++i) {
      out << detail::format_double(report.weights[i]);
      for (const ClassifierEvaluation& cls : report.classifiers)
        for (const std::vector<CurvePoint>& curve : cls.curves)
          out << ',' << detail::format_double(curve[i].perceived);
      out << '\n';
    }
  }

  {
    std::ofstream out = detail::open_out(dir / "summary.txt");
    out << "test records: " << report.test_size << '\n';
    for (const ClassifierEvaluation& cls : report.classifiers) {
      out << '\n' << cls.name << ":\n";
      out << "  closed-set accuracy: " << detail::format_double(cls.closed_accuracy) << '\n';
      for (const OpenSetAccuracy& row : cls.sweep) {
        out << "  threshold " << threshold_tag(row.threshold)
            << ": open=" << detail::format_double(row.open)
            << " known=" << detail::format_optional(row.known)
            << " unknown=" << detail::format_optional(row.unknown)
            << " (unknown records: " << row.n_unknown
            << ", rejected: " << row.predicted_unknown << ")\n";
      }
    }
    if (!report.crossover.empty()) {
      out << "\ncrossover (first weight where " << report.classifiers[1].name << " beats "
          << report.classifiers[0].name << "):\n";
      for (std::size_t i = 0; i < report.crossover.size(); ++i) {
        out << "  threshold " << threshold_tag(report.classifiers[0].sweep[i].threshold) << ": ";
        if (report.crossover[i])
          out << detail::format_double(*report.crossover[i]) << '\n';
        else
          out << "none\n";
      }
    }
  }
}

struct PredictionRow {
  std::string truth;
  std::optional<std::size_t> predicted;
  double max_probability = 0;
  double threshold = 0;
  std::vector<double> per_class;  // written only when class_names given
};

inline void write_predictions(const std::filesystem::path& path,
                              std::span<const PredictionRow> rows,
                              std::span<const std::string> predicted_names,
                              std::span<const std::string> per_class_names = {}) {
  std::ofstream out = detail::open_out(path);
  out << "true_label,predicted,max_probability,threshold";
  for (const std::string& name : per_class_names) out << ",p_" << name;
  out << '\n';
  for (const PredictionRow& row : rows) {
    out << row.truth << ','
        << (row.predicted ? predicted_names[*row.predicted] : std::string("UNKNOWN")) << ','
        << detail::format_double(row.max_probability) << ','
        << detail::format_double(row.threshold);
    if (!per_class_names.empty())
      for (double p : row.per_class) out << ',' << detail::format_double(p);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Reader + self-check

// Rebuilds the checkable portion of a report from the emitted CSVs. Values
// round-trip exactly, so identity checks compare with ==.
inline EvaluationReport read_report(const std::filesystem::path& dir) {
  EvaluationReport report;

  auto closed = detail::read_csv(dir / "closed.csv");
  check(closed.front() == std::vector<std::string>({"classifier", "closed_accuracy", "test_size"}),
        "closed.csv: unexpected header");
  for (std::size_t r = 1; r < closed.size(); ++r) {
    check(closed[r].size() == 3, "closed.csv: bad row");
    ClassifierEvaluation cls;
    cls.name = closed[r][0];
    cls.closed_accuracy = detail::parse_double(closed[r][1], "closed.csv");
    report.test_size = static_cast<std::size_t>(
        std::strtoull(closed[r][2].c_str(), nullptr, 10));
    report.classifiers.push_back(std::move(cls));
  }

  auto find_classifier = [&](const std::string& name) -> ClassifierEvaluation& {
    for (ClassifierEvaluation& cls : report.classifiers)
      if (cls.name == name) return cls;
    fail("sweep.csv: classifier '" + name + "' missing from closed.csv");
  };

  auto sweep = detail::read_csv(dir / "sweep.csv");
  check(sweep.front() ==
            std::vector<std::string>({"classifier", "threshold", "open_accuracy",
                                      "known_accuracy", "unknown_accuracy", "unknown_count"}),
        "sweep.csv: unexpected header");
  for (std::size_t r = 1; r < sweep.size(); ++r) {
    check(sweep[r].size() == 6, "sweep.csv: bad row");
    ClassifierEvaluation& cls = find_classifier(sweep[r][0]);
    OpenSetAccuracy row;
    row.threshold = detail::parse_double(sweep[r][1], "sweep.csv");
    row.open = detail::parse_double(sweep[r][2], "sweep.csv");
    row.known = detail::parse_optional(sweep[r][3], "sweep.csv");
    row.unknown = detail::parse_optional(sweep[r][4], "sweep.csv");
    row.n_unknown = static_cast<std::size_t>(std::strtoull(sweep[r][5].c_str(), nullptr, 10));
    row.n_known = report.test_size - row.n_unknown;
    row.correct_known =
        row.known ? static_cast<std::size_t>(std::llround(*row.known * row.n_known)) : 0;
    row.correct_unknown =
        row.unknown ? static_cast<std::size_t>(std::llround(*row.unknown * row.n_unknown)) : 0;
    cls.sweep.push_back(row);
  }

  auto curve = detail::read_csv(dir / "curve.csv");
  const std::vector<std::string>& header = curve.front();
  check(!header.empty() && header[0] == "weight", "curve.csv: unexpected header");
  for (std::size_t r = 1; r < curve.size(); ++r)
    report.weights.push_back(detail::parse_double(curve[r][0], "curve.csv"));

  std::size_t col = 1;
  for (ClassifierEvaluation& cls : report.classifiers) {
    for (const OpenSetAccuracy& row : cls.sweep) {
      std::string want = "perceived_" + cls.name + "_" + threshold_tag(row.threshold);
      check(col < header.size() && header[col] == want,
            "curve.csv: expected column '" + want + "'");
      std::vector<CurvePoint> pts;
      for (std::size_t r = 1; r < curve.size(); ++r) {
        check(curve[r].size() == header.size(), "curve.csv: ragged row");
        pts.push_back({report.weights[r - 1], detail::parse_double(curve[r][col], "curve.csv")});
      }
      cls.curves.push_back(std::move(pts));
      ++col;
    }
  }
  check(col == header.size(), "curve.csv: unexpected extra columns");
  return report;
}

// Re-reads an emitted report directory and re-asserts the exact identities.
inline std::vector<std::string> self_check_report_dir(const std::filesystem::path& dir) {
  EvaluationReport report = read_report(dir);
  return report_identity_violations(report);
}

}  // namespace osir
