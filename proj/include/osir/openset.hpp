#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osir/cap.hpp"
#include "osir/error.hpp"
#include "osir/matrix.hpp"
#include "osir/multiclass.hpp"
#include "osir/parallel.hpp"
#include "osir/platt.hpp"
#include "osir/smo.hpp"
#include "osir/weibull.hpp"

namespace osir {

struct CalibrationConfig {
  std::size_t folds = 3;     // cross-validation folds for calibration scores
  std::size_t tail_size = 0; // 0 = max(3, half the available scores)
  double delta_tau = 1e-3;   // CAP gate threshold
  double nu = 0.1;           // one-class fraction
  std::uint64_t seed = 42;
};

// A prediction is either a known class index or UNKNOWN (nullopt).
struct OpenSetPrediction {
  std::vector<double> per_class_probability;
  std::optional<std::size_t> predicted;
  double max_probability = 0;
  double threshold_used = 0;

  bool is_unknown() const { return !predicted.has_value(); }
};

namespace detail {

// predicted = UNKNOWN iff max probability < threshold, otherwise the argmax
// class (ties to the lowest index).
inline OpenSetPrediction decide(std::vector<double> probs, double threshold) {
  OpenSetPrediction pred;
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  pred.max_probability = probs.empty() ? 0 : probs[best];
  pred.threshold_used = threshold;
  if (!probs.empty() && pred.max_probability >= threshold) pred.predicted = best;
  pred.per_class_probability = std::move(probs);
  return pred;
}

// Per-class decision values from stratified cross-validation: scores[k][t]
// is record t scored by the class-k one-vs-rest model of the fold that held
// t out. Calibrators fitted on these avoid resubstitution bias.
inline std::vector<std::vector<double>> cv_decision_values(
    const FeatureMatrix& X, std::span<const std::size_t> labels, std::size_t num_classes,
    const KernelParams& params, const CalibrationConfig& cal, const SolverConfig& solver,
    std::size_t workers) {
  std::vector<std::size_t> fold_of = stratified_folds(labels, num_classes, cal.folds, cal.seed);

  struct Split {
    FeatureMatrix train_x;
    std::vector<std::size_t> train_labels;
    std::vector<std::size_t> held_out;
  };
  std::vector<Split> splits(cal.folds);
  for (std::size_t f = 0; f < cal.folds; ++f) {
    splits[f].train_x = FeatureMatrix(X.dim);
    for (std::size_t t = 0; t < X.rows(); ++t) {
      if (fold_of[t] == f) {
        splits[f].held_out.push_back(t);
      } else {
        splits[f].train_x.push_row(X.row(t));
        splits[f].train_labels.push_back(labels[t]);
      }
    }
  }

  std::vector<std::vector<double>> scores(num_classes, std::vector<double>(X.rows(), 0.0));
  parallel_for_index(cal.folds * num_classes, workers, [&](std::size_t task) {
    std::size_t f = task / num_classes;
    std::size_t k = task % num_classes;
    const Split& split = splits[f];
    std::vector<int> y = ovr_labels(split.train_labels, k);
    BinarySvmModel model = smo_train(split.train_x, y, params, solver);
    for (std::size_t t : split.held_out) scores[k][t] = model.decision(X.row(t));
  });
  return scores;
}

[[noreturn]] inline void class_fit_error(std::size_t k, std::span<const std::string> names,
                                         const std::string& what) {
  std::string name = k < names.size() ? std::string(names[k]) : "class " + std::to_string(k);
  fail("fit failed for class '" + name + "': " + what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Platt-calibrated one-vs-rest RBF SVM (closed-set baseline)

// Per-class sigmoid probabilities over independent one-vs-rest machines; the
// per-class values deliberately do not sum to 1. The sigmoid has unbounded
// support: far from the data each probability settles at the sigmoid of the
// machine's bias, so this family cannot guarantee rejection of distant novel
// inputs - that is exactly the failure mode the W-SVM closes.
struct PlattModel {
  KernelParams kernel;
  std::vector<BinarySvmModel> binaries;
  std::vector<PlattCalibrator> calibrators;

  std::size_t num_classes() const { return binaries.size(); }

  std::vector<double> class_probabilities(std::span<const double> x) const {
    std::vector<double> probs(binaries.size());
    for (std::size_t k = 0; k < binaries.size(); ++k)
      probs[k] = calibrators[k].probability(binaries[k].decision(x));
    return probs;
  }
};

inline PlattModel train_platt(const FeatureMatrix& X, std::span<const std::size_t> labels,
                              std::size_t num_classes, const KernelParams& params,
                              const CalibrationConfig& cal = {}, const SolverConfig& solver = {},
                              std::size_t workers = 1,
                              std::span<const std::string> class_names = {}) {
  check(num_classes >= 2, "train_platt: need at least two classes");
  std::vector<std::vector<double>> cv =
      detail::cv_decision_values(X, labels, num_classes, params, cal, solver, workers);

  PlattModel model;
  model.kernel = params;
  model.binaries = train_ovr(X, labels, num_classes, params, solver, workers);
  model.calibrators.resize(num_classes);
  parallel_for_index(num_classes, workers, [&](std::size_t k) {
    try {
      std::vector<int> y = ovr_labels(labels, k);
      model.calibrators[k] = platt_fit(cv[k], y);
    } catch (const Error& e) {
      detail::class_fit_error(k, class_names, e.what());
    }
  });
  return model;
}

inline OpenSetPrediction platt_predict(const PlattModel& model, std::span<const double> x,
                                       double threshold) {
  return detail::decide(model.class_probabilities(x), threshold);
}

// ---------------------------------------------------------------------------
// W-SVM: Weibull-calibrated one-vs-rest RBF SVM with a CAP gate per class

struct WsvmClassModel {
  BinarySvmModel binary;
  WeibullModel eta;  // rejection-side fit over negative-class scores nearest the boundary
  WeibullModel psi;  // inclusion-side fit over the positive-class extreme scores
  CapGate gate;
};

struct WsvmModel {
  KernelParams kernel;
  std::vector<WsvmClassModel> classes;

  std::size_t num_classes() const { return classes.size(); }

  // Per-class probability: [gate >= delta_tau] * P_eta(f) * P_psi(f).
  std::vector<double> class_probabilities(std::span<const double> x) const {
    std::vector<double> probs(classes.size(), 0.0);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const WsvmClassModel& cm = classes[k];
      if (!cm.gate.passes(x)) continue;
      double f = cm.binary.decision(x);
      probs[k] = cm.eta.probability(f) * cm.psi.probability(f);
    }
    return probs;
  }
};

inline WsvmModel train_wsvm(const FeatureMatrix& X, std::span<const std::size_t> labels,
                            std::size_t num_classes, const KernelParams& params,
                            const CalibrationConfig& cal = {}, const SolverConfig& solver = {},
                            std::size_t workers = 1,
                            std::span<const std::string> class_names = {}) {
  check(num_classes >= 2, "train_wsvm: need at least two classes");
  std::vector<std::vector<double>> cv =
      detail::cv_decision_values(X, labels, num_classes, params, cal, solver, workers);
  std::vector<BinarySvmModel> binaries = train_ovr(X, labels, num_classes, params, solver, workers);

  WsvmModel model;
  model.kernel = params;
  model.classes.resize(num_classes);
  parallel_for_index(num_classes, workers, [&](std::size_t k) {
    try {
      WsvmClassModel& cm = model.classes[k];
      cm.binary = std::move(binaries[k]);

      std::vector<double> pos, neg;
      FeatureMatrix own(X.dim);
      for (std::size_t t = 0; t < X.rows(); ++t) {
        if (labels[t] == k) {
          pos.push_back(cv[k][t]);
          own.push_row(X.row(t));
        } else {
          neg.push_back(cv[k][t]);
        }
      }

      std::size_t pos_tail = cal.tail_size ? std::min(cal.tail_size, pos.size())
                                           : default_tail_size(pos.size());
      std::size_t neg_tail = cal.tail_size ? std::min(cal.tail_size, neg.size())
                                           : default_tail_size(neg.size());

      // Inclusion evidence: the positive-class scores at the decision-boundary
      // end of the score distribution. The CDF saturates for scores beyond
      // that extreme band, so typical members of the class calibrate near 1.
      cm.psi = weibull_fit(pos, pos_tail, TailSide::lower);
      // Rejection evidence: the negative-class scores nearest the boundary.
      // Probability reaches 1 only past the reach of the negatives.
      cm.eta = weibull_fit(neg, neg_tail, TailSide::upper);
      cm.gate = fit_cap_gate(own, params.gamma, cal.nu, cal.delta_tau, cal.tail_size, solver);
    } catch (const Error& e) {
      detail::class_fit_error(k, class_names, e.what());
    }
  });
  return model;
}

inline OpenSetPrediction wsvm_predict(const WsvmModel& model, std::span<const double> x,
                                      double threshold) {
  return detail::decide(model.class_probabilities(x), threshold);
}

}  // namespace osir
