#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "osir/error.hpp"

namespace osir {

// Row-major dense feature matrix. All learners operate on this shape; the
// 41-attribute pipeline and the low-dimensional test fixtures share it.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> values;  // rows() * dim entries, row-major

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t d) : dim(d) {}

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }

  void push_row(std::span<const double> x) {
    check(x.size() == dim, "FeatureMatrix: row dimension mismatch");
    values.insert(values.end(), x.begin(), x.end());
  }

  void push_row(std::initializer_list<double> x) {
    push_row(std::span<const double>(x.begin(), x.size()));
  }
};

}  // namespace osir
