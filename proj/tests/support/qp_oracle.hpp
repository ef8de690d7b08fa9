#pragma once

// Dense active-set QP oracle used to verify the SMO solver. Solves
//     min 1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a_i <= upper_i
// exactly (up to linear-algebra precision) by active-set iterations with a
// direct KKT solve over the free variables. Completely independent of the
// production solver: no working-set heuristics, no kernel cache, long
// double linear algebra.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qp_oracle {

struct Problem {
  std::size_t n = 0;
  std::vector<double> q;      // n*n, row-major, symmetric
  std::vector<double> p;      // linear term
  std::vector<double> y;      // +1/-1
  std::vector<double> upper;  // box upper bounds
};

struct Solution {
  std::vector<double> alpha;
  double objective = 0;
  std::size_t iterations = 0;
};

namespace detail {

// Partial-pivot LU solve of a dense (m x m) system in long double.
inline std::vector<long double> solve_dense(std::vector<long double> a,
                                            std::vector<long double> b) {
  const std::size_t m = b.size();
  std::vector<std::size_t> piv(m);
  for (std::size_t i = 0; i < m; ++i) piv[i] = i;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::fabs(static_cast<double>(a[r * m + col])) >
          std::fabs(static_cast<double>(a[best * m + col])))
        best = r;
    if (best != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(a[col * m + c], a[best * m + c]);
      std::swap(b[col], b[best]);
    }
    long double pivot = a[col * m + col];
    if (std::fabs(static_cast<double>(pivot)) < 1e-200)
      throw std::runtime_error("qp_oracle: singular KKT system");
    for (std::size_t r = col + 1; r < m; ++r) {
      long double f = a[r * m + col] / pivot;
      if (f == 0) continue;
      for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<long double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    long double s = b[i];
    for (std::size_t c = i + 1; c < m; ++c) s -= a[i * m + c] * x[c];
    x[i] = s / a[i * m + i];
  }
  return x;
}

}  // namespace detail

inline Solution solve(const Problem& prob) {
  const std::size_t n = prob.n;
  const double eps_bound = 0;          // bounds are tracked exactly by state
  const double eps_mult = 1e-10;       // multiplier feasibility slack
  const double eps_step = 1e-13;       // "no movement" threshold
  (void)eps_bound;

  enum class State { lower, upper, free };
  std::vector<State> state(n, State::lower);
  std::vector<long double> alpha(n, 0.0L);

  auto gradient = [&](std::size_t i) {
    long double g = prob.p[i];
    for (std::size_t j = 0; j < n; ++j) g += static_cast<long double>(prob.q[i * n + j]) * alpha[j];
    return g;
  };

  const std::size_t max_iter = 400 * n + 2000;
  std::size_t iter = 0;
  for (;; ++iter) {
    if (iter > max_iter) throw std::runtime_error("qp_oracle: iteration cap hit");

    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] == State::free) free_idx.push_back(i);

    if (free_idx.empty()) {
      // Choose nu from the feasibility interval of the bound multipliers:
      //   lower bound i: g_i + nu*y_i >= 0, upper bound i: g_i + nu*y_i <= 0.
      long double nu_lo = -1e300L, nu_hi = 1e300L;
      std::size_t lo_arg = n, hi_arg = n;
      for (std::size_t i = 0; i < n; ++i) {
        long double g = gradient(i);
        bool at_lower = state[i] == State::lower;
        if ((at_lower && prob.y[i] > 0) || (!at_lower && prob.y[i] < 0)) {
          long double bound = at_lower ? -g : g;
          if (bound > nu_lo) {
            nu_lo = bound;
            lo_arg = i;
          }
        } else {
          long double bound = at_lower ? g : -g;
          if (bound < nu_hi) {
            nu_hi = bound;
            hi_arg = i;
          }
        }
      }
      if (nu_lo <= nu_hi + eps_mult) break;  // optimal
      state[lo_arg] = State::free;
      state[hi_arg] = State::free;
      continue;
    }

    // KKT system over the free variables.
    const std::size_t m = free_idx.size();
    std::vector<long double> a((m + 1) * (m + 1), 0.0L);
    std::vector<long double> b(m + 1, 0.0L);
    long double fixed_sum = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (state[i] != State::free) fixed_sum += prob.y[i] * alpha[i];
    for (std::size_t r = 0; r < m; ++r) {
      std::size_t i = free_idx[r];
      long double rhs = -static_cast<long double>(prob.p[i]);
      for (std::size_t j = 0; j < n; ++j)
        if (state[j] != State::free)
          rhs -= static_cast<long double>(prob.q[i * n + j]) * alpha[j];
      b[r] = rhs;
      for (std::size_t c = 0; c < m; ++c) a[r * (m + 1) + c] = prob.q[i * n + free_idx[c]];
      a[r * (m + 1) + m] = prob.y[i];
      a[m * (m + 1) + r] = prob.y[i];
    }
    b[m] = -fixed_sum;

    std::vector<long double> sol = detail::solve_dense(std::move(a), std::move(b));
    long double nu = sol[m];

    // Step toward the subproblem solution, clipped at the first bound.
    long double t = 1.0L;
    std::size_t blocker = n;
    bool to_upper = false;
    for (std::size_t r = 0; r < m; ++r) {
      std::size_t i = free_idx[r];
      long double d = sol[r] - alpha[i];
      if (std::fabs(static_cast<double>(d)) <= eps_step) continue;
      long double limit;
      bool up;
      if (d > 0) {
        limit = (static_cast<long double>(prob.upper[i]) - alpha[i]) / d;
        up = true;
      } else {
        limit = (0.0L - alpha[i]) / d;
        up = false;
      }
      if (limit < t) {
        t = limit;
        blocker = i;
        to_upper = up;
      }
    }

    long double moved = 0;
    for (std::size_t r = 0; r < m; ++r) {
      std::size_t i = free_idx[r];
      long double d = sol[r] - alpha[i];
      alpha[i] += t * d;
      moved += std::fabs(static_cast<double>(t * d));
    }

    if (blocker < n && t < 1.0L) {
      alpha[blocker] = to_upper ? prob.upper[blocker] : 0.0L;  // snap exactly
      state[blocker] = to_upper ? State::upper : State::lower;
      continue;
    }

    if (moved > eps_step) continue;  // keep iterating from the new point

    // At the subproblem optimum: check multipliers of the bound constraints.
    long double worst = -eps_mult;
    std::size_t worst_idx = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == State::free) continue;
      long double lambda = gradient(i) + nu * prob.y[i];
      if (state[i] == State::upper) lambda = -lambda;
      if (lambda < worst) {
        worst = lambda;
        worst_idx = i;
      }
    }
    if (worst_idx == n) break;  // optimal
    state[worst_idx] = State::free;
  }

  Solution out;
  out.alpha.resize(n);
  long double obj = 0;
  for (std::size_t i = 0; i < n; ++i) out.alpha[i] = static_cast<double>(alpha[i]);
  for (std::size_t i = 0; i < n; ++i) {
    long double qa = 0;
    for (std::size_t j = 0; j < n; ++j) qa += static_cast<long double>(prob.q[i * n + j]) * alpha[j];
    obj += alpha[i] * (0.5L * qa + prob.p[i]);
  }
  out.objective = static_cast<double>(obj);
  out.iterations = iter;
  return out;
}

}  // namespace qp_oracle
