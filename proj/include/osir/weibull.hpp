#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osir/error.hpp"

namespace osir {

// Which extreme of the sample the fit models.
enum class TailSide {
  lower,  // smallest values; probability(x) is a CDF rising from 0 at the location
  upper,  // largest values, fitted mirrored; probability(x) rises to exactly 1 at the location
};

// Two-parameter Weibull over values shifted by `location`.
//
// lower orientation:  p(x) = 1 - exp(-((x - location)/scale)^shape), 0 for x <= location.
// upper orientation:  p(x) = exp(-((location - x)/scale)^shape),     1 for x >= location.
//
// Both orientations are monotone non-decreasing in x.
struct WeibullModel {
  double shape = 1;
  double scale = 1;
  double location = 0;
  TailSide orientation = TailSide::lower;

  double probability(double x) const {
    if (orientation == TailSide::lower) {
      if (x <= location) return 0.0;
      double z = (x - location) / scale;
      return -std::expm1(-std::pow(z, shape));
    }
    if (x >= location) return 1.0;
    double z = (location - x) / scale;
    return std::exp(-std::pow(z, shape));
  }
};

inline double weibull_prob(const WeibullModel& model, double x) { return model.probability(x); }

struct WeibullFitOptions {
  // Explicit location override. Default anchors the location a hair below
  // the most extreme tail sample (in fit coordinates).
  std::optional<double> location;
};

namespace detail {

// Maximum-likelihood fit of shape/scale to positive samples z_i via
// safeguarded Newton on the profile equation
//   h(k) = sum(z^k ln z)/sum(z^k) - 1/k - mean(ln z) = 0,
// which is increasing in k. Samples are rescaled by their maximum first so
// z^k cannot overflow; h is invariant under that rescale.
inline std::pair<double, double> weibull_mle(std::span<const double> z) {
  const std::size_t n = z.size();
  double zmax = 0;
  for (double v : z) {
    check(v > 0, "weibull fit: non-positive shifted sample");
    zmax = std::max(zmax, v);
  }

  std::vector<double> u(n);
  double mean_ln = 0;
  for (std::size_t t = 0; t < n; ++t) {
    u[t] = z[t] / zmax;
    mean_ln += std::log(u[t]);
  }
  mean_ln /= static_cast<double>(n);

  auto h_and_slope = [&](double k) {
    double sw = 0, swl = 0, swll = 0;
    for (std::size_t t = 0; t < n; ++t) {
      double w = std::pow(u[t], k);
      double l = std::log(u[t]);
      sw += w;
      swl += w * l;
      swll += w * l * l;
    }
    double ratio = swl / sw;
    double h = ratio - 1.0 / k - mean_ln;
    double slope = (swll / sw - ratio * ratio) + 1.0 / (k * k);
    return std::pair{h, slope};
  };

  // Bracket the root. h(0+) -> -inf; h(inf) > 0 for non-degenerate samples.
  double lo = 1e-8, hi = 1.0;
  while (h_and_slope(hi).first < 0) {
    hi *= 2;
    if (hi > 1e9) fail("weibull fit: shape bracket exhausted (degenerate sample?)");
  }

  // Start from the usual log-moment guess, then safeguarded Newton.
  double var_ln = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double d = std::log(u[t]) - mean_ln;
    var_ln += d * d;
  }
  var_ln /= static_cast<double>(n);
  double k = var_ln > 0 ? 1.2 / std::sqrt(var_ln) : 1.0;
  k = std::clamp(k, lo, hi);

  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    auto [h, slope] = h_and_slope(k);
    if (std::fabs(h) < 1e-12) {
      converged = true;
      break;
    }
    if (h > 0)
      hi = k;
    else
      lo = k;
    double next = k - h / slope;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;  // bisection safeguard
    if (std::fabs(next - k) < 1e-14 * std::max(1.0, k)) {
      k = next;
      converged = true;
      break;
    }
    k = next;
  }
  if (!converged) fail("weibull fit: MLE did not converge");

  double sw = 0;
  for (std::size_t t = 0; t < n; ++t) sw += std::pow(u[t], k);
  double lambda = zmax * std::pow(sw / static_cast<double>(n), 1.0 / k);
  return {k, lambda};
}

}  // namespace detail

// Maximum-likelihood Weibull fit to the tail_size extreme samples: the
// smallest values for TailSide::lower, the largest (fitted mirrored) for
// TailSide::upper. The location is placed so every tail sample is strictly
// inside the support.
inline WeibullModel weibull_fit(std::span<const double> samples, std::size_t tail_size,
                                TailSide side, const WeibullFitOptions& options = {}) {
  check(tail_size >= 3, "weibull_fit: tail_size must be at least 3");
  check(samples.size() >= tail_size, "weibull_fit: need at least tail_size samples (" +
                                         std::to_string(samples.size()) + " < " +
                                         std::to_string(tail_size) + ")");

  // Work in fit coordinates: identity for the lower tail, mirrored for the
  // upper tail, so the tail is always the smallest values.
  std::vector<double> fit_vals(samples.begin(), samples.end());
  if (side == TailSide::upper)
    for (double& v : fit_vals) v = -v;
  std::partial_sort(fit_vals.begin(), fit_vals.begin() + static_cast<std::ptrdiff_t>(tail_size),
                    fit_vals.end());
  fit_vals.resize(tail_size);

  double tail_min = fit_vals.front();
  double tail_max = fit_vals.back();
  if (tail_max == tail_min) fail("weibull_fit: degenerate tail (all samples equal)");

  double location;
  if (options.location) {
    location = side == TailSide::upper ? -*options.location : *options.location;
    check(location < tail_min, "weibull_fit: location must lie strictly below the tail");
  } else {
    double margin = 1e-9 * std::max({tail_max - tail_min, std::fabs(tail_min), 1.0});
    location = tail_min - margin;
  }

  std::vector<double> shifted(tail_size);
  for (std::size_t t = 0; t < tail_size; ++t) shifted[t] = fit_vals[t] - location;
  auto [shape, scale] = detail::weibull_mle(shifted);

  WeibullModel model;
  model.shape = shape;
  model.scale = scale;
  model.orientation = side;
  model.location = side == TailSide::upper ? -location : location;
  return model;
}

}  // namespace osir
