#pragma once

// Deterministic synthetic fixtures shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "osir/matrix.hpp"
#include "osir/random.hpp"

namespace synth {

inline double normal_draw(osir::Rng& rng) {
  // Box-Muller on the library's deterministic uniforms.
  double u1 = 0;
  do {
    u1 = osir::uniform_unit(rng);
  } while (u1 <= 0);
  double u2 = osir::uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct LabeledPoints {
  osir::FeatureMatrix x;
  std::vector<std::size_t> labels;
};

// Isotropic Gaussian blobs around the given centers.
inline LabeledPoints make_blobs(const std::vector<std::vector<double>>& centers, double sigma,
                                std::size_t per_class, std::uint64_t seed) {
  osir::Rng rng(seed);
  LabeledPoints out;
  out.x = osir::FeatureMatrix(centers.front().size());
  std::vector<double> point(centers.front().size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < point.size(); ++d)
        point[d] = centers[k][d] + sigma * normal_draw(rng);
      out.x.push_row(point);
      out.labels.push_back(k);
    }
  }
  return out;
}

// The standard three well-separated blobs fixture.
inline LabeledPoints three_blobs(std::size_t per_class = 60, std::uint64_t seed = 20240401,
                                 double sigma = 0.35) {
  return make_blobs({{0.0, 0.0}, {4.0, 0.0}, {2.0, 3.4}}, sigma, per_class, seed);
}

inline double data_diameter(const osir::FeatureMatrix& x) {
  double best = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i + 1; j < x.rows(); ++j)
      best = std::max(best, osir::squared_distance(x.row(i), x.row(j)));
  return std::sqrt(best);
}

inline std::vector<double> data_centroid(const osir::FeatureMatrix& x) {
  std::vector<double> c(x.dim, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t d = 0; d < x.dim; ++d) c[d] += row[d];
  }
  for (double& v : c) v /= static_cast<double>(x.rows());
  return c;
}

// Query at `multiple` data diameters from the centroid along the direction
// of `toward` (typically a class center).
inline std::vector<double> far_query(const osir::FeatureMatrix& x, const std::vector<double>& toward,
                                     double multiple) {
  std::vector<double> c = data_centroid(x);
  double diameter = data_diameter(x);
  double norm = 0;
  std::vector<double> dir(x.dim);
  for (std::size_t d = 0; d < x.dim; ++d) {
    dir[d] = toward[d] - c[d];
    norm += dir[d] * dir[d];
  }
  norm = std::sqrt(norm);
  std::vector<double> q(x.dim);
  for (std::size_t d = 0; d < x.dim; ++d) q[d] = c[d] + dir[d] / norm * multiple * diameter;
  return q;
}

}  // namespace synth
