#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "osir/error.hpp"

namespace osir {

// Sigmoid map from decision value to probability: p(f) = 1/(1 + exp(a*f + b)).
// Fitted a is negative whenever larger decision values mean the positive
// class, making p strictly increasing in f.
struct PlattCalibrator {
  double a = 0;
  double b = 0;

  double probability(double f) const {
    double z = a * f + b;
    // log-domain evaluation, never overflows
    if (z >= 0) {
      double e = std::exp(-z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
  }
};

inline double platt_prob(const PlattCalibrator& cal, double f) { return cal.probability(f); }

// Regularized maximum-likelihood sigmoid fit with smoothed targets
// t+ = (N+ + 1)/(N+ + 2) and t- = 1/(N- + 2), solved by a safeguarded
// Newton iteration with backtracking line search.
inline PlattCalibrator platt_fit(std::span<const double> decision_values,
                                 std::span<const int> labels) {
  const std::size_t n = decision_values.size();
  check(n == labels.size(), "platt_fit: value/label count mismatch");
  double prior1 = 0, prior0 = 0;
  for (int y : labels) {
    check(y == 1 || y == -1, "platt_fit: labels must be +1/-1");
    (y > 0 ? prior1 : prior0) += 1;
  }
  check(prior1 > 0 && prior0 > 0, "platt_fit: single-label input (need both labels)");

  const int max_iter = 100;
  const double min_step = 1e-10;
  const double sigma = 1e-12;  // keeps the Hessian strictly positive definite
  const double eps = 1e-5;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t t = 0; t < n; ++t) target[t] = labels[t] > 0 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double aa, double bb) {
    double val = 0;
    for (std::size_t t = 0; t < n; ++t) {
      double z = decision_values[t] * aa + bb;
      if (z >= 0)
        val += target[t] * z + std::log1p(std::exp(-z));
      else
        val += (target[t] - 1) * z + std::log1p(std::exp(z));
    }
    return val;
  };

  double fval = objective(a, b);
  for (int iter = 0; iter < max_iter; ++iter) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t t = 0; t < n; ++t) {
      double z = decision_values[t] * a + b;
      double p, q;
      if (z >= 0) {
        double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      double d2 = p * q;
      h11 += decision_values[t] * decision_values[t] * d2;
      h22 += d2;
      h21 += decision_values[t] * d2;
      double d1 = target[t] - p;
      g1 += decision_values[t] * d1;
      g2 += d1;
    }

    if (std::fabs(g1) < eps && std::fabs(g2) < eps) return {a, b};

    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da;
      double nb = b + step * db;
      double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) fail("platt_fit: line search failed (divergence)");
  }
  fail("platt_fit: no convergence within iteration limit");
}

}  // namespace osir
