#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "osir/kernel.hpp"
#include "osir/multiclass.hpp"
#include "osir/random.hpp"
#include "osir/smo.hpp"
#include "support/qp_oracle.hpp"
#include "support/synth.hpp"

using namespace osir;

namespace {

// Cyclic Jacobi eigenvalues of a small symmetric matrix (test-only).
std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  return eig;
}

struct Instance {
  FeatureMatrix x{2};
  std::vector<int> y;
  KernelParams params;
};

Instance random_instance(Rng& rng) {
  Instance inst;
  std::size_t n = 4 + uniform_below(rng, 17);  // 4..20 points
  for (;;) {
    inst.x.values.clear();
    inst.y.clear();
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      inst.x.push_row({uniform_unit(rng), uniform_unit(rng)});
      int label = uniform_unit(rng) < 0.5 ? 1 : -1;
      inst.y.push_back(label);
      (label > 0 ? pos : neg) = true;
    }
    if (pos && neg) break;
  }
  const double cs[] = {1, 10, 1000};
  const double gammas[] = {0.1, 1};
  inst.params = {cs[uniform_below(rng, 3)], gammas[uniform_below(rng, 2)]};
  return inst;
}

qp_oracle::Problem oracle_problem(const Instance& inst) {
  qp_oracle::Problem prob;
  prob.n = inst.x.rows();
  prob.q.resize(prob.n * prob.n);
  for (std::size_t i = 0; i < prob.n; ++i)
    for (std::size_t j = 0; j < prob.n; ++j)
      prob.q[i * prob.n + j] = inst.y[i] * inst.y[j] *
                               rbf_kernel(inst.x.row(i), inst.x.row(j), inst.params.gamma);
  prob.p.assign(prob.n, -1.0);
  for (int label : inst.y) prob.y.push_back(label);
  prob.upper.assign(prob.n, inst.params.c);
  return prob;
}

double recompute_objective(const Instance& inst, const BinarySvmModel& model) {
  // 1/2 sum_st c_s c_t K(s,t) - sum |c| over the stored support vectors
  double quad = 0, lin = 0;
  for (std::size_t s = 0; s < model.support_vectors.rows(); ++s) {
    lin += std::fabs(model.dual_coefficients[s]);
    for (std::size_t t = 0; t < model.support_vectors.rows(); ++t)
      quad += model.dual_coefficients[s] * model.dual_coefficients[t] *
              rbf_kernel(model.support_vectors.row(s), model.support_vectors.row(t),
                         inst.params.gamma);
  }
  return quad / 2 - lin;
}

}  // namespace

TEST_CASE("rbf kernel basics") {
  std::vector<double> x = {0.3, 0.7};
  std::vector<double> z = {0.1, 0.2};
  CHECK(rbf_kernel(x, x, 0.5) == 1.0);

  // gamma=0.1 at squared distance 10 -> exp(-1)
  std::vector<double> a = {0.0};
  std::vector<double> b = {std::sqrt(10.0)};
  CHECK_THAT(rbf_kernel(a, b, 0.1), Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-12));

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> u = {uniform_unit(rng), uniform_unit(rng)};
    std::vector<double> v = {uniform_unit(rng), uniform_unit(rng)};
    double k = rbf_kernel(u, v, 1.0);
    CHECK(k == rbf_kernel(v, u, 1.0));
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
  }

  std::vector<double> wrong = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(rbf_kernel(x, wrong, 1.0), Error);
}

TEST_CASE("kernel matrices are positive semi-definite") {
  Rng rng(17);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 10;
    FeatureMatrix x(3);
    for (std::size_t i = 0; i < n; ++i)
      x.push_row({uniform_unit(rng), uniform_unit(rng), uniform_unit(rng)});
    double gamma = 0.1 + 2.0 * uniform_unit(rng);
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k[i * n + j] = rbf_kernel(x.row(i), x.row(j), gamma);
    for (double eig : sym_eigenvalues(k, n)) CHECK(eig >= -1e-8);
  }
}

TEST_CASE("two-point problem: equality constraint forces equal alphas") {
  FeatureMatrix x(1);
  x.push_row({0.0});
  x.push_row({1.0});
  std::vector<int> y = {1, -1};
  KernelParams params{1000, 1.0};
  BinarySvmModel model = smo_train(x, y, params, {1e-9, 10'000'000, 1 << 20});

  REQUIRE(model.dual_coefficients.size() == 2);
  double a1 = model.dual_coefficients[0];
  double a2 = -model.dual_coefficients[1];
  CHECK_THAT(a1, Catch::Matchers::WithinAbs(a2, 1e-9));
  // analytic optimum: alpha = 1/(1 - exp(-1))
  CHECK_THAT(a1, Catch::Matchers::WithinAbs(1.0 / (1.0 - std::exp(-1.0)), 1e-6));

  // midpoint lies on the decision boundary
  std::vector<double> mid = {0.5};
  CHECK_THAT(model.decision(mid), Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("XOR matches the brute-force QP oracle and classifies all points") {
  Instance inst;
  inst.x = FeatureMatrix(2);
  inst.x.push_row({0.0, 0.0});
  inst.x.push_row({1.0, 1.0});
  inst.x.push_row({0.0, 1.0});
  inst.x.push_row({1.0, 0.0});
  inst.y = {1, 1, -1, -1};
  inst.params = {1000, 1.0};

  BinarySvmModel model = smo_train(inst.x, inst.y, inst.params, {1e-9, 10'000'000, 1 << 20});
  qp_oracle::Solution oracle = qp_oracle::solve(oracle_problem(inst));

  // closed form by symmetry: all alphas equal 1/(1-e^-1)^2, objective -2*alpha
  double s = 1.0 - std::exp(-1.0);
  double alpha_star = 1.0 / (s * s);
  for (double a : oracle.alpha) CHECK_THAT(a, Catch::Matchers::WithinAbs(alpha_star, 1e-9));
  CHECK_THAT(oracle.objective, Catch::Matchers::WithinAbs(-2.0 * alpha_star, 1e-9));
  CHECK_THAT(model.objective, Catch::Matchers::WithinAbs(oracle.objective, 1e-6));

  for (std::size_t i = 0; i < 4; ++i)
    CHECK(inst.y[i] * model.decision(inst.x.row(i)) > 0);
}

TEST_CASE("single-class input is rejected") {
  FeatureMatrix x(2);
  x.push_row({0.0, 0.0});
  x.push_row({1.0, 1.0});
  std::vector<int> y = {1, 1};
  CHECK_THROWS_AS(smo_train(x, y, KernelParams{1, 1}), Error);
}

TEST_CASE("SMO agrees with the QP oracle on random instances") {
  Rng rng(20250801);
  SolverConfig config{1e-8, 10'000'000, 1 << 22};
  for (int round = 0; round < 40; ++round) {
    Instance inst = random_instance(rng);
    BinarySvmModel model = smo_train(inst.x, inst.y, inst.params, config);
    qp_oracle::Solution oracle = qp_oracle::solve(oracle_problem(inst));
    INFO("round " << round << " n=" << inst.x.rows() << " C=" << inst.params.c
                  << " gamma=" << inst.params.gamma);
    CHECK_THAT(model.objective, Catch::Matchers::WithinAbs(oracle.objective, 1e-6));
    // the stored-model objective recomputation agrees with the solver's
    CHECK_THAT(recompute_objective(inst, model),
               Catch::Matchers::WithinAbs(model.objective, 1e-6));
  }
}

TEST_CASE("dual feasibility and KKT conditions hold after training") {
  Rng rng(99);
  const double tol = 1e-3;
  SolverConfig config{tol, 10'000'000, 1 << 22};
  for (int round = 0; round < 25; ++round) {
    Instance inst = random_instance(rng);
    BinarySvmModel model = smo_train(inst.x, inst.y, inst.params, config);

    double sum_ay = 0;
    for (std::size_t s = 0; s < model.dual_coefficients.size(); ++s) {
      double alpha = std::fabs(model.dual_coefficients[s]);
      CHECK(alpha > 0);                  // only support vectors stored
      CHECK(alpha <= inst.params.c + 1e-12);
      sum_ay += model.dual_coefficients[s];
    }
    CHECK(std::fabs(sum_ay) <= 10 * tol);

    // margin support vectors: y*f(x) == 1 within 10*tol
    for (std::size_t s = 0; s < model.support_vectors.rows(); ++s) {
      double alpha = std::fabs(model.dual_coefficients[s]);
      if (alpha >= inst.params.c) continue;
      double y = model.dual_coefficients[s] > 0 ? 1.0 : -1.0;
      double f = model.decision(model.support_vectors.row(s));
      CHECK(std::fabs(y * f - 1.0) <= 10 * tol);
    }
  }
}

TEST_CASE("training is deterministic and cache-size independent") {
  Rng rng(3);
  Instance inst = random_instance(rng);

  BinarySvmModel a = smo_train(inst.x, inst.y, inst.params, {1e-6, 10'000'000, 1 << 22});
  BinarySvmModel b = smo_train(inst.x, inst.y, inst.params, {1e-6, 10'000'000, 1 << 22});
  CHECK(a.dual_coefficients == b.dual_coefficients);
  CHECK(a.bias == b.bias);

  // a cache too small to hold the working rows must not change the result
  BinarySvmModel c = smo_train(inst.x, inst.y, inst.params, {1e-6, 10'000'000, 1});
  CHECK(a.dual_coefficients == c.dual_coefficients);
  CHECK(a.bias == c.bias);
  CHECK(a.objective == c.objective);
}

TEST_CASE("non-convergence within the iteration cap raises a diagnostic error") {
  Rng rng(8);
  Instance inst = random_instance(rng);
  SolverConfig starved{1e-9, 2, 1 << 20};
  try {
    smo_train(inst.x, inst.y, inst.params, starved);
    FAIL("expected a convergence error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no convergence") != std::string::npos);
  }
}

TEST_CASE("one-vs-rest trains one model per class with mirrored 2-class labelings") {
  synth::LabeledPoints blobs = synth::make_blobs({{0, 0}, {3, 0}}, 0.3, 25, 7);
  std::vector<BinarySvmModel> models =
      train_ovr(blobs.x, blobs.labels, 2, KernelParams{10, 0.5}, {1e-8, 10'000'000, 1 << 22});
  REQUIRE(models.size() == 2);
  for (std::size_t i = 0; i < blobs.x.rows(); ++i) {
    double f0 = models[0].decision(blobs.x.row(i));
    double f1 = models[1].decision(blobs.x.row(i));
    CHECK_THAT(f0, Catch::Matchers::WithinAbs(-f1, 1e-5));  // mirrored problems
  }
}

TEST_CASE("one-vs-rest separates three gaussian blobs perfectly") {
  synth::LabeledPoints blobs = synth::three_blobs(40);
  std::vector<BinarySvmModel> models =
      train_ovr(blobs.x, blobs.labels, 3, KernelParams{1000, 1.0});
  REQUIRE(models.size() == 3);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < blobs.x.rows(); ++i)
    if (ovr_predict(models, blobs.x.row(i)) == blobs.labels[i]) ++correct;
  CHECK(correct == blobs.x.rows());  // closed-set accuracy 1.0
}

TEST_CASE("grid search: single cell, tie-breaking, and small-class errors") {
  synth::LabeledPoints blobs = synth::three_blobs(21);
  std::vector<std::string> names = {"a", "b", "c"};

  SECTION("single-cell grid returns that cell") {
    std::vector<KernelParams> grid = {{7, 0.3}};
    GridSearchResult result = grid_search_cv(blobs.x, blobs.labels, 3, names, grid, 3, 42);
    CHECK(result.best.c == 7);
    CHECK(result.best.gamma == 0.3);
    REQUIRE(result.table.size() == 1);
    CHECK(result.table[0].fold_accuracies.size() == 3);
  }

  SECTION("ties break toward smaller C, then smaller gamma") {
    // easily separable: every cell reaches identical (perfect) accuracy
    std::vector<KernelParams> grid = cross_grid(std::vector<double>{10.0, 1.0},
                                                std::vector<double>{1.0, 0.1});
    GridSearchResult result = grid_search_cv(blobs.x, blobs.labels, 3, names, grid, 3, 42);
    double best_acc = 0;
    for (const GridCell& cell : result.table) best_acc = std::max(best_acc, cell.mean_accuracy);
    REQUIRE(best_acc == 1.0);
    CHECK(result.best.c == 1.0);
    CHECK(result.best.gamma == 0.1);
  }

  SECTION("a class smaller than the fold count is an error naming the class") {
    FeatureMatrix x = blobs.x;
    std::vector<std::size_t> labels = blobs.labels;
    x.push_row({9.0, 9.0});
    x.push_row({9.1, 9.0});
    labels.push_back(3);
    labels.push_back(3);
    std::vector<std::string> names4 = {"a", "b", "c", "tiny_class"};
    std::vector<KernelParams> grid = {{1, 1}};
    try {
      grid_search_cv(x, labels, 4, names4, grid, 3, 42);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("tiny_class") != std::string::npos);
    }
  }
}

TEST_CASE("decision value far from every support vector approaches the bias") {
  synth::LabeledPoints blobs = synth::make_blobs({{0, 0}, {2, 0}}, 0.2, 15, 11);
  std::vector<int> y;
  for (std::size_t label : blobs.labels) y.push_back(label == 0 ? 1 : -1);
  BinarySvmModel model = smo_train(blobs.x, y, KernelParams{10, 1.0});
  std::vector<double> far = {1e4, -1e4};
  CHECK_THAT(model.decision(far), Catch::Matchers::WithinAbs(model.bias, 1e-12));
}
