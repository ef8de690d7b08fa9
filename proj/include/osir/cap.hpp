#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "osir/error.hpp"
#include "osir/matrix.hpp"
#include "osir/smo.hpp"
#include "osir/weibull.hpp"

namespace osir {

// Default calibration tail: half the available scores, never fewer than 3.
inline std::size_t default_tail_size(std::size_t available) {
  return std::max<std::size_t>(3, (available + 1) / 2);
}

// Compact abating gate for one class: a one-class kernel machine scored
// through a Weibull CDF over that machine's own lowest training scores.
// Far from the class's support the one-class score falls to its floor and
// the gate probability reaches exactly zero.
struct CapGate {
  OneClassModel one_class;
  WeibullModel weibull;
  double delta_tau = 1e-3;

  double probability(std::span<const double> x) const {
    return weibull.probability(one_class.score(x));
  }

  bool passes(std::span<const double> x) const { return probability(x) >= delta_tau; }
};

inline CapGate fit_cap_gate(const FeatureMatrix& class_vectors, double gamma, double nu,
                            double delta_tau, std::size_t tail_size = 0,
                            const SolverConfig& config = {}) {
  check(class_vectors.rows() >= 3, "fit_cap_gate: need at least 3 vectors in the class");
  check(delta_tau >= 0 && delta_tau <= 1, "fit_cap_gate: delta_tau must be in [0,1]");

  CapGate gate;
  gate.delta_tau = delta_tau;
  gate.one_class = train_one_class(class_vectors, gamma, nu, config);

  std::vector<double> scores(class_vectors.rows());
  for (std::size_t t = 0; t < class_vectors.rows(); ++t)
    scores[t] = gate.one_class.score(class_vectors.row(t));

  if (tail_size == 0) tail_size = default_tail_size(scores.size());
  tail_size = std::min(tail_size, scores.size());

  // Anchor the Weibull location just above the score floor, if the data
  // leaves room: every training score then sits well inside the support
  // while any sufficiently distant query falls below the location and gets
  // probability exactly 0.
  double floor = gate.one_class.score_floor();
  double lowest = *std::min_element(scores.begin(), scores.end());
  WeibullFitOptions options;
  if (lowest > floor) options.location = floor + 1e-3 * (lowest - floor);

  gate.weibull = weibull_fit(scores, tail_size, TailSide::lower, options);
  return gate;
}

}  // namespace osir
