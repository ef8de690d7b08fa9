#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/kernel.hpp"
#include "osir/matrix.hpp"

namespace osir {

struct SolverConfig {
  double tolerance = 1e-3;                       // max admissible KKT violation
  std::uint64_t max_iterations = 10'000'000;     // working-set steps per binary problem
  std::size_t cache_bytes = 256u << 20;          // kernel row cache budget
};

namespace detail {

struct DualSolution {
  std::vector<double> alpha;
  double rho = 0;
  double objective = 0;
  std::uint64_t iterations = 0;
};

// Decomposition solver for
//     min  1/2 a'Qa + p'a   s.t.  y'a fixed,  0 <= a_i <= upper_i
// with Q_st = y_s y_t K(x_s, x_t). Working pairs are chosen by maximal
// violation with a second-order gain criterion; each pair is solved
// analytically. The initial alpha must be feasible.
inline DualSolution solve_smo(const KernelEvaluator& eval, std::span<const signed char> y,
                              std::span<const double> p, std::span<const double> upper,
                              std::vector<double> alpha, const SolverConfig& config) {
  const std::size_t n = eval.size();
  check(config.tolerance > 0, "solver: tolerance must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  const double tau = 1e-12;

  KernelRowCache cache(eval, config.cache_bytes);

  std::vector<double> qd(n);  // diagonal of K (and of Q)
  for (std::size_t t = 0; t < n; ++t) qd[t] = eval.entry(t, t);

  // G = Qa + p
  std::vector<double> grad(p.begin(), p.end());
  for (std::size_t s = 0; s < n; ++s) {
    if (alpha[s] == 0) continue;
    std::span<const double> row = cache.row(s);
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += static_cast<double>(y[s]) * y[t] * row[t] * alpha[s];
  }

  auto in_up = [&](std::size_t t) {
    return y[t] > 0 ? alpha[t] < upper[t] : alpha[t] > 0;
  };
  auto in_low = [&](std::size_t t) {
    return y[t] > 0 ? alpha[t] > 0 : alpha[t] < upper[t];
  };

  DualSolution out;
  std::uint64_t iter = 0;
  for (;; ++iter) {
    // First index: maximal violation over the "up" set.
    double gmax = -inf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_up(t)) continue;
      double v = -static_cast<double>(y[t]) * grad[t];
      if (v > gmax) {
        gmax = v;
        i = t;
      }
    }

    double gmax2 = -inf;
    std::size_t j = n;
    std::span<const double> row_i;
    if (i < n) row_i = cache.row(i);

    // Second index: best second-order gain among violating "low" candidates.
    double best_gain = -inf;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      double yg = static_cast<double>(y[t]) * grad[t];
      if (yg > gmax2) gmax2 = yg;
      if (i == n) continue;
      double b = gmax + yg;
      if (b <= 0) continue;
      double quad = qd[i] + qd[t] - 2 * row_i[t];
      if (quad <= 0) quad = tau;
      double gain = b * b / quad;
      if (gain > best_gain) {
        best_gain = gain;
        j = t;
      }
    }

    if (i == n || j == n || gmax + gmax2 < config.tolerance) break;

    if (iter >= config.max_iterations)
      fail("solver: no convergence after " + std::to_string(iter) + " steps (violation " +
           std::to_string(gmax + gmax2) + ", tolerance " + std::to_string(config.tolerance) +
           ", n=" + std::to_string(n) + ")");

    std::span<const double> row_j = cache.row(j);
    double old_ai = alpha[i];
    double old_aj = alpha[j];

    double quad = qd[i] + qd[j] - 2 * row_i[j];
    if (quad <= 0) quad = tau;

    if (y[i] != y[j]) {
      double delta = (-grad[i] - grad[j]) / quad;
      double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else {
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = -diff;
        }
      }
      if (diff > upper[i] - upper[j]) {
        if (alpha[i] > upper[i]) {
          alpha[i] = upper[i];
          alpha[j] = upper[i] - diff;
        }
      } else {
        if (alpha[j] > upper[j]) {
          alpha[j] = upper[j];
          alpha[i] = upper[j] + diff;
        }
      }
    } else {
      double delta = (grad[i] - grad[j]) / quad;
      double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > upper[i]) {
        if (alpha[i] > upper[i]) {
          alpha[i] = upper[i];
          alpha[j] = sum - upper[i];
        }
      } else {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = sum;
        }
      }
      if (sum > upper[j]) {
        if (alpha[j] > upper[j]) {
          alpha[j] = upper[j];
          alpha[i] = sum - upper[j];
        }
      } else {
        if (alpha[i] < 0) {
          alpha[i] = 0;
          alpha[j] = sum;
        }
      }
    }

    double dai = alpha[i] - old_ai;
    double daj = alpha[j] - old_aj;
    if (dai == 0 && daj == 0) continue;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += static_cast<double>(y[t]) *
                 (static_cast<double>(y[i]) * row_i[t] * dai + static_cast<double>(y[j]) * row_j[t] * daj);
  }

  // Offset from the free variables, or the midpoint of the active bounds.
  double ub = inf, lb = -inf, sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double yg = static_cast<double>(y[t]) * grad[t];
    if (alpha[t] >= upper[t]) {
      if (y[t] < 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  out.rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2;

  double obj = 0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] + p[t]);
  out.objective = obj / 2;
  out.alpha = std::move(alpha);
  out.iterations = iter;
  return out;
}

}  // namespace detail

// Soft-margin binary RBF SVM in dual form. Only vectors with alpha > 0 are
// stored; dual_coefficients holds alpha_i * y_i.
struct BinarySvmModel {
  KernelParams kernel;
  FeatureMatrix support_vectors;
  std::vector<double> dual_coefficients;
  double bias = 0;
  double objective = 0;  // dual objective at the solution (diagnostic)

  double decision(std::span<const double> x) const {
    double f = bias;
    for (std::size_t s = 0; s < support_vectors.rows(); ++s)
      f += dual_coefficients[s] * rbf_kernel(support_vectors.row(s), x, kernel.gamma);
    return f;
  }
};

inline double decision_value(const BinarySvmModel& model, std::span<const double> x) {
  return model.decision(x);
}

// Trains the dual problem
//     min 1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C
// to the configured KKT tolerance.
inline BinarySvmModel smo_train(const FeatureMatrix& X, std::span<const int> y,
                                const KernelParams& params, const SolverConfig& config = {}) {
  params.validate();
  const std::size_t n = X.rows();
  check(n == y.size(), "smo_train: label count does not match row count");
  check(n >= 2, "smo_train: need at least two points");

  bool has_pos = false, has_neg = false;
  std::vector<signed char> yy(n);
  for (std::size_t t = 0; t < n; ++t) {
    check(y[t] == 1 || y[t] == -1, "smo_train: labels must be +1/-1");
    yy[t] = static_cast<signed char>(y[t]);
    (y[t] > 0 ? has_pos : has_neg) = true;
  }
  check(has_pos && has_neg, "smo_train: single-class input (need both labels)");

  KernelEvaluator eval(X, params.gamma);
  std::vector<double> p(n, -1.0);
  std::vector<double> upper(n, params.c);
  detail::DualSolution sol =
      detail::solve_smo(eval, yy, p, upper, std::vector<double>(n, 0.0), config);

  BinarySvmModel model;
  model.kernel = params;
  model.support_vectors = FeatureMatrix(X.dim);
  model.bias = -sol.rho;
  model.objective = sol.objective;
  for (std::size_t t = 0; t < n; ++t) {
    if (sol.alpha[t] > 0) {
      model.support_vectors.push_row(X.row(t));
      model.dual_coefficients.push_back(sol.alpha[t] * y[t]);
    }
  }
  return model;
}

// One-class kernel machine (nu formulation): score(x) = sum_i a_i K(x_i,x) - rho,
// nonnegative on the fraction of training data the model encloses.
struct OneClassModel {
  double gamma = 0.1;
  FeatureMatrix support_vectors;
  std::vector<double> coefficients;  // alpha_i > 0
  double offset = 0;                 // rho

  double score(std::span<const double> x) const {
    double g = -offset;
    for (std::size_t s = 0; s < support_vectors.rows(); ++s)
      g += coefficients[s] * rbf_kernel(support_vectors.row(s), x, gamma);
    return g;
  }

  // Greatest lower bound of score() over all of feature space: the kernel
  // sum decays to zero far from every support vector.
  double score_floor() const { return -offset; }
};

inline OneClassModel train_one_class(const FeatureMatrix& X, double gamma, double nu,
                                     const SolverConfig& config = {}) {
  const std::size_t n = X.rows();
  check(n >= 1, "train_one_class: empty class");
  check(gamma > 0, "train_one_class: gamma must be positive");
  check(nu > 0 && nu <= 1, "train_one_class: nu must be in (0,1]");

  // Feasible start: sum(alpha) = nu*n with 0 <= alpha_i <= 1.
  std::vector<double> alpha(n, 0.0);
  double budget = nu * static_cast<double>(n);
  for (std::size_t t = 0; t < n && budget > 0; ++t) {
    alpha[t] = std::min(1.0, budget);
    budget -= alpha[t];
  }

  KernelEvaluator eval(X, gamma);
  std::vector<signed char> yy(n, 1);
  std::vector<double> p(n, 0.0);
  std::vector<double> upper(n, 1.0);
  detail::DualSolution sol = detail::solve_smo(eval, yy, p, upper, std::move(alpha), config);

  OneClassModel model;
  model.gamma = gamma;
  model.support_vectors = FeatureMatrix(X.dim);
  model.offset = sol.rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (sol.alpha[t] > 0) {
      model.support_vectors.push_row(X.row(t));
      model.coefficients.push_back(sol.alpha[t]);
    }
  }
  return model;
}

}  // namespace osir
