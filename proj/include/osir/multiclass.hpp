#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/matrix.hpp"
#include "osir/parallel.hpp"
#include "osir/random.hpp"
#include "osir/smo.hpp"

namespace osir {

// ---------------------------------------------------------------------------
// One-vs-rest decomposition

inline std::vector<int> ovr_labels(std::span<const std::size_t> labels, std::size_t positive) {
  std::vector<int> y(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == positive ? 1 : -1;
  return y;
}

// One binary model per class, index-aligned with the class ids (which follow
// LabelSpace order). Model k is trained with class k as +1, the rest as -1.
inline std::vector<BinarySvmModel> train_ovr(const FeatureMatrix& X,
                                             std::span<const std::size_t> labels,
                                             std::size_t num_classes, const KernelParams& params,
                                             const SolverConfig& config = {},
                                             std::size_t workers = 1) {
  check(num_classes >= 2, "train_ovr: need at least two classes");
  check(X.rows() == labels.size(), "train_ovr: label count does not match row count");
  std::vector<BinarySvmModel> models(num_classes);
  parallel_for_index(num_classes, workers, [&](std::size_t k) {
    std::vector<int> y = ovr_labels(labels, k);
    models[k] = smo_train(X, y, params, config);
  });
  return models;
}

inline std::vector<double> ovr_decision_values(std::span<const BinarySvmModel> models,
                                               std::span<const double> x) {
  std::vector<double> f(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) f[k] = models[k].decision(x);
  return f;
}

// Closed-set prediction: argmax decision value, ties to the lowest index.
inline std::size_t ovr_predict(std::span<const BinarySvmModel> models, std::span<const double> x) {
  std::vector<double> f = ovr_decision_values(models, x);
  return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
}

// ---------------------------------------------------------------------------
// Stratified cross-validation folds

// fold id per record: within each class, indices are shuffled once (seeded)
// and dealt round-robin, so every fold sees every class that has >= folds
// members and no fold loses a class entirely when classes are smaller.
inline std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels,
                                                 std::size_t num_classes, std::size_t folds,
                                                 std::uint64_t seed) {
  check(folds >= 2, "stratified_folds: need at least two folds");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t t = 0; t < labels.size(); ++t) members[labels[t]].push_back(t);

  std::vector<std::size_t> fold_of(labels.size(), 0);
  Rng rng(seed);
  for (std::size_t k = 0; k < num_classes; ++k) {
    shuffle_inplace(members[k], rng);
    for (std::size_t pos = 0; pos < members[k].size(); ++pos)
      fold_of[members[k][pos]] = pos % folds;
  }
  return fold_of;
}

// ---------------------------------------------------------------------------
// Grid search

struct GridCell {
  KernelParams params;
  double mean_accuracy = 0;
  std::vector<double> fold_accuracies;
};

struct GridSearchResult {
  KernelParams best;
  std::vector<GridCell> table;
};

// The odd-decade grid used for both C and gamma by default.
inline std::vector<double> odd_decades() { return {1e-5, 1e-3, 1e-1, 1e1, 1e3, 1e5}; }

inline std::vector<KernelParams> cross_grid(std::span<const double> c_values,
                                            std::span<const double> gamma_values) {
  std::vector<KernelParams> grid;
  for (double c : c_values)
    for (double g : gamma_values) grid.push_back({c, g});
  return grid;
}

// Stratified k-fold mean accuracy per grid cell; the best cell maximizes the
// mean, with ties broken by smaller C, then smaller gamma.
inline GridSearchResult grid_search_cv(const FeatureMatrix& X, std::span<const std::size_t> labels,
                                       std::size_t num_classes,
                                       std::span<const std::string> class_names,
                                       std::span<const KernelParams> grid, std::size_t folds,
                                       std::uint64_t seed, const SolverConfig& config = {},
                                       std::size_t workers = 1) {
  check(!grid.empty(), "grid_search_cv: empty grid");
  check(folds >= 2, "grid_search_cv: need at least two folds");

  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t label : labels) ++counts[label];
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (counts[k] < folds) {
      std::string name = k < class_names.size() ? std::string(class_names[k])
                                                : "class " + std::to_string(k);
      fail("grid_search_cv: class '" + name + "' has " + std::to_string(counts[k]) +
           " records, fewer than " + std::to_string(folds) + " folds");
    }
  }

  std::vector<std::size_t> fold_of = stratified_folds(labels, num_classes, folds, seed);

  // Materialize per-fold training splits once; cells reuse them.
  struct Split {
    FeatureMatrix train_x;
    std::vector<std::size_t> train_labels;
    std::vector<std::size_t> held_out;  // record indices
  };
  std::vector<Split> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
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

  GridSearchResult result;
  result.table.resize(grid.size());
  parallel_for_index(grid.size(), workers, [&](std::size_t cell) {
    GridCell& entry = result.table[cell];
    entry.params = grid[cell];
    for (std::size_t f = 0; f < folds; ++f) {
      const Split& split = splits[f];
      std::vector<BinarySvmModel> models =
          train_ovr(split.train_x, split.train_labels, num_classes, grid[cell], config, 1);
      std::size_t correct = 0;
      for (std::size_t t : split.held_out)
        if (ovr_predict(models, X.row(t)) == labels[t]) ++correct;
      entry.fold_accuracies.push_back(static_cast<double>(correct) /
                                      static_cast<double>(split.held_out.size()));
    }
    double sum = 0;
    for (double a : entry.fold_accuracies) sum += a;
    entry.mean_accuracy = sum / static_cast<double>(folds);
  });

  const GridCell* best = &result.table.front();
  for (const GridCell& cell : result.table) {
    if (cell.mean_accuracy > best->mean_accuracy ||
        (cell.mean_accuracy == best->mean_accuracy &&
         (cell.params.c < best->params.c ||
          (cell.params.c == best->params.c && cell.params.gamma < best->params.gamma))))
      best = &cell;
  }
  result.best = best->params;
  return result;
}

}  // namespace osir
