#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/ingest.hpp"
#include "osir/openset.hpp"

namespace osir {

// One scored test record: truth label plus the per-known-class probabilities
// computed once; thresholds are applied in post-processing.
struct ScoredRecord {
  std::string truth;
  std::vector<double> probs;
};

struct OpenSetAccuracy {
  double threshold = 0;
  double open = 0;
  std::optional<double> known;    // empty partition -> n/a
  std::optional<double> unknown;  // empty partition -> n/a
  std::size_t n_known = 0;
  std::size_t n_unknown = 0;
  std::size_t correct_known = 0;
  std::size_t correct_unknown = 0;
  std::size_t predicted_unknown = 0;  // records rejected at this threshold
};

struct CurvePoint {
  double weight = 0;
  double perceived = 0;
};

namespace detail {

inline std::optional<std::size_t> decide_index(std::span<const double> probs, double threshold) {
  if (probs.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  if (probs[best] < threshold) return std::nullopt;
  return best;
}

}  // namespace detail

// Closed-set protocol: plain argmax (threshold 0), correct iff the predicted
// class matches a known truth label. Records whose truth is not a trained
// class are necessarily incorrect under this protocol.
inline double closed_set_accuracy(std::span<const ScoredRecord> scored,
                                  const LabelSpace& labels) {
  check(!scored.empty(), "closed_set_accuracy: no predictions");
  std::size_t correct = 0;
  for (const ScoredRecord& rec : scored) {
    std::optional<std::size_t> pred = detail::decide_index(rec.probs, 0.0);
    std::optional<std::size_t> truth = labels.class_index(rec.truth);
    if (truth && pred && *pred == *truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scored.size());
}

// Open-set protocol at one threshold: correct iff a known-truth record is
// assigned its own class, or an unknown-truth record is rejected. The open
// accuracy is computed through the partition decomposition
//   open = (n_known * known_acc + n_unknown * unknown_acc) / n_total
// so the identity holds exactly as floating-point arithmetic.
inline OpenSetAccuracy open_set_accuracy(std::span<const ScoredRecord> scored, double threshold,
                                         const LabelSpace& labels) {
  check(!scored.empty(), "open_set_accuracy: no predictions");
  OpenSetAccuracy acc;
  acc.threshold = threshold;
  for (const ScoredRecord& rec : scored) {
    std::optional<std::size_t> pred = detail::decide_index(rec.probs, threshold);
    std::optional<std::size_t> truth = labels.class_index(rec.truth);
    if (!pred) ++acc.predicted_unknown;
    if (truth) {
      ++acc.n_known;
      if (pred && *pred == *truth) ++acc.correct_known;
    } else {
      ++acc.n_unknown;
      if (!pred) ++acc.correct_unknown;
    }
  }
  if (acc.n_known > 0)
    acc.known = static_cast<double>(acc.correct_known) / static_cast<double>(acc.n_known);
  if (acc.n_unknown > 0)
    acc.unknown = static_cast<double>(acc.correct_unknown) / static_cast<double>(acc.n_unknown);

  double total = static_cast<double>(acc.n_known + acc.n_unknown);
  double known_part = acc.n_known > 0 ? static_cast<double>(acc.n_known) * *acc.known : 0.0;
  double unknown_part = acc.n_unknown > 0 ? static_cast<double>(acc.n_unknown) * *acc.unknown : 0.0;
  acc.open = (known_part + unknown_part) / total;
  return acc;
}

// perceived(w) = (1-w) * known + w * unknown on the given weight grid.
// When one partition is empty its accuracy is undefined and the curve
// degenerates to the other partition's constant.
inline std::vector<CurvePoint> cost_of_unknown_curve(std::optional<double> known_acc,
                                                     std::optional<double> unknown_acc,
                                                     std::span<const double> weights) {
  check(known_acc || unknown_acc, "cost_of_unknown_curve: both partitions empty");
  std::vector<CurvePoint> curve;
  curve.reserve(weights.size());
  for (double w : weights) {
    double perceived;
    if (known_acc && unknown_acc)
      perceived = (1.0 - w) * *known_acc + w * *unknown_acc;
    else
      perceived = known_acc ? *known_acc : *unknown_acc;
    curve.push_back({w, perceived});
  }
  return curve;
}

inline std::vector<double> weight_grid(double step = 0.01) {
  check(step > 0 && step <= 1, "weight_grid: step must be in (0,1]");
  std::vector<double> weights;
  std::size_t n = static_cast<std::size_t>(std::llround(1.0 / step));
  for (std::size_t i = 0; i <= n; ++i)
    weights.push_back(std::min(1.0, static_cast<double>(i) * step));
  return weights;
}

// Smallest grid weight where curve_b (the open-set recognizer) strictly
// exceeds curve_a (the baseline); nullopt when it never does.
inline std::optional<double> find_crossover(std::span<const CurvePoint> curve_a,
                                            std::span<const CurvePoint> curve_b) {
  check(curve_a.size() == curve_b.size(), "find_crossover: weight grids differ in size");
  for (std::size_t i = 0; i < curve_a.size(); ++i) {
    check(curve_a[i].weight == curve_b[i].weight, "find_crossover: weight grids differ");
    if (curve_b[i].perceived > curve_a[i].perceived) return curve_a[i].weight;
  }
  return std::nullopt;
}

// Smallest grid weight from which curve_b strictly dominates curve_a for
// every weight to the right (inclusive); nullopt when no such point exists.
inline std::optional<double> dominance_onset(std::span<const CurvePoint> curve_a,
                                             std::span<const CurvePoint> curve_b) {
  check(curve_a.size() == curve_b.size(), "dominance_onset: weight grids differ in size");
  std::optional<double> onset;
  for (std::size_t i = curve_a.size(); i-- > 0;) {
    check(curve_a[i].weight == curve_b[i].weight, "dominance_onset: weight grids differ");
    if (curve_b[i].perceived > curve_a[i].perceived)
      onset = curve_a[i].weight;
    else
      break;
  }
  return onset;
}

// One open_set_accuracy row per threshold (ascending).
inline std::vector<OpenSetAccuracy> threshold_sweep(std::span<const ScoredRecord> scored,
                                                    std::span<const double> thresholds,
                                                    const LabelSpace& labels) {
  check(std::is_sorted(thresholds.begin(), thresholds.end()),
        "threshold_sweep: thresholds must be sorted ascending");
  std::vector<OpenSetAccuracy> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) rows.push_back(open_set_accuracy(scored, t, labels));
  return rows;
}

// ---------------------------------------------------------------------------
// Report assembly

struct ClassifierEvaluation {
  std::string name;  // "platt" or "wsvm"
  double closed_accuracy = 0;
  std::vector<OpenSetAccuracy> sweep;
  // one curve per sweep row, index-aligned
  std::vector<std::vector<CurvePoint>> curves;
};

struct EvaluationReport {
  std::size_t test_size = 0;
  std::vector<double> weights;
  std::vector<ClassifierEvaluation> classifiers;
  // crossover weight per threshold index (baseline = first classifier,
  // open-set = second), present only when both classifiers exist
  std::vector<std::optional<double>> crossover;
};

inline ClassifierEvaluation evaluate_classifier(const std::string& name,
                                                std::span<const ScoredRecord> scored,
                                                std::span<const double> thresholds,
                                                std::span<const double> weights,
                                                const LabelSpace& labels) {
  ClassifierEvaluation eval;
  eval.name = name;
  eval.closed_accuracy = closed_set_accuracy(scored, labels);
  eval.sweep = threshold_sweep(scored, thresholds, labels);
  for (const OpenSetAccuracy& row : eval.sweep)
    eval.curves.push_back(cost_of_unknown_curve(row.known, row.unknown, weights));
  return eval;
}

inline EvaluationReport build_report(std::span<const ClassifierEvaluation> classifiers,
                                     std::span<const double> weights, std::size_t test_size) {
  EvaluationReport report;
  report.test_size = test_size;
  report.weights.assign(weights.begin(), weights.end());
  report.classifiers.assign(classifiers.begin(), classifiers.end());
  if (report.classifiers.size() == 2) {
    const ClassifierEvaluation& base = report.classifiers[0];
    const ClassifierEvaluation& open = report.classifiers[1];
    std::size_t rows = std::min(base.curves.size(), open.curves.size());
    for (std::size_t i = 0; i < rows; ++i)
      report.crossover.push_back(find_crossover(base.curves[i], open.curves[i]));
  }
  return report;
}

// The identities asserted by self-check mode; returns human-readable
// violation messages (empty = all good).
inline std::vector<std::string> report_identity_violations(const EvaluationReport& report) {
  std::vector<std::string> bad;
  for (const ClassifierEvaluation& cls : report.classifiers) {
    for (std::size_t i = 0; i < cls.sweep.size(); ++i) {
      const OpenSetAccuracy& row = cls.sweep[i];
      if (row.n_known + row.n_unknown != report.test_size)
        bad.push_back(cls.name + ": partition counts do not sum to the test size");
      double total = static_cast<double>(row.n_known + row.n_unknown);
      double known_part = row.known ? static_cast<double>(row.n_known) * *row.known : 0.0;
      double unknown_part = row.unknown ? static_cast<double>(row.n_unknown) * *row.unknown : 0.0;
      if (row.open != (known_part + unknown_part) / total)
        bad.push_back(cls.name + ": open accuracy does not decompose over the partitions at threshold " +
                      std::to_string(row.threshold));
      if (i >= cls.curves.size()) continue;
      const std::vector<CurvePoint>& curve = cls.curves[i];
      for (const CurvePoint& pt : curve) {
        if (row.known && row.unknown) {
          double expect = (1.0 - pt.weight) * *row.known + pt.weight * *row.unknown;
          if (pt.perceived != expect) {
            bad.push_back(cls.name + ": perceived accuracy is not affine in the weight at w=" +
                          std::to_string(pt.weight));
            break;
          }
        }
      }
      if (!curve.empty() && row.known && curve.front().weight == 0.0 &&
          curve.front().perceived != *row.known)
        bad.push_back(cls.name + ": perceived(0) != known accuracy");
      if (!curve.empty() && row.unknown && curve.back().weight == 1.0 &&
          curve.back().perceived != *row.unknown)
        bad.push_back(cls.name + ": perceived(1) != unknown accuracy");
    }
  }
  return bad;
}

}  // namespace osir
