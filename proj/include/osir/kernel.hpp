#pragma once

#include <cmath>
#include <cstddef>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "osir/error.hpp"
#include "osir/matrix.hpp"

namespace osir {

struct KernelParams {
  double c = 1000.0;   // soft-margin penalty
  double gamma = 0.1;  // RBF width

  void validate() const {
    check(c > 0, "KernelParams: C must be positive");
    check(gamma > 0, "KernelParams: gamma must be positive");
  }
};

inline double squared_distance(std::span<const double> x, std::span<const double> z) {
  check(x.size() == z.size(), "rbf_kernel: dimension mismatch (" + std::to_string(x.size()) +
                                  " vs " + std::to_string(z.size()) + ")");
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - z[i];
    d2 += d * d;
  }
  return d2;
}

// K(x,z) = exp(-gamma * ||x - z||^2)
inline double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  return std::exp(-gamma * squared_distance(x, z));
}

// Evaluates kernel rows against a fixed training matrix, with the self dot
// products precomputed: ||xi-xj||^2 = xi.xi + xj.xj - 2 xi.xj.
class KernelEvaluator {
 public:
  KernelEvaluator(const FeatureMatrix& X, double gamma) : x_(X), gamma_(gamma) {
    self_dot_.resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
      auto r = X.row(i);
      double s = 0;
      for (double v : r) s += v * v;
      self_dot_[i] = s;
    }
  }

  std::size_t size() const { return x_.rows(); }
  double gamma() const { return gamma_; }

  double entry(std::size_t i, std::size_t j) const {
    auto a = x_.row(i);
    auto b = x_.row(j);
    double dot = 0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    double d2 = self_dot_[i] + self_dot_[j] - 2 * dot;
    return std::exp(-gamma_ * (d2 < 0 ? 0 : d2));
  }

  void fill_row(std::size_t i, std::span<double> out) const {
    for (std::size_t j = 0; j < x_.rows(); ++j) out[j] = entry(i, j);
  }

 private:
  const FeatureMatrix& x_;
  double gamma_;
  std::vector<double> self_dot_;
};

// Least-recently-used cache of full kernel rows under a byte budget.
// Correctness never depends on the budget; a too-small budget just
// recomputes rows.
class KernelRowCache {
 public:
  KernelRowCache(const KernelEvaluator& eval, std::size_t byte_budget)
      : eval_(eval) {
    std::size_t row_bytes = eval.size() * sizeof(double);
    max_rows_ = row_bytes == 0 ? 1 : byte_budget / row_bytes;
    if (max_rows_ < 2) max_rows_ = 2;  // solver touches two rows per step
  }

  std::span<const double> row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return {it->second->data.data(), eval_.size()};
    }
    while (lru_.size() >= max_rows_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
    }
    lru_.push_front(Entry{i, std::vector<double>(eval_.size())});
    eval_.fill_row(i, lru_.front().data);
    index_[i] = lru_.begin();
    return {lru_.front().data.data(), eval_.size()};
  }

 private:
  struct Entry {
    std::size_t key;
    std::vector<double> data;
  };

  const KernelEvaluator& eval_;
  std::size_t max_rows_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace osir
