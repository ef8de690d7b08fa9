#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "osir/config.hpp"
#include "osir/dataset_io.hpp"
#include "osir/error.hpp"
#include "osir/eval.hpp"
#include "osir/ingest.hpp"
#include "osir/model_io.hpp"
#include "osir/multiclass.hpp"
#include "osir/openset.hpp"
#include "osir/parallel.hpp"
#include "osir/preprocess.hpp"
#include "osir/record.hpp"
#include "osir/report_io.hpp"

namespace osir {

// ---------------------------------------------------------------------------
// prepare: raw KDD text -> columnar dataset + label space + scaler

struct PrepareSummary {
  std::size_t train_raw = 0;
  std::size_t train_dedup = 0;
  std::size_t test_raw = 0;
  std::size_t test_dedup = 0;
  std::vector<DownsampledClass> downsampled;
  std::vector<std::pair<std::string, std::size_t>> removed_rare;
  std::size_t train_final = 0;
  std::size_t known_classes = 0;
  std::size_t unknown_classes = 0;
};

namespace detail {

struct DedupedFile {
  std::vector<ConnectionRecord> records;
  std::size_t total_lines = 0;
};

// Single streaming pass: parse, validate, keep first occurrences only.
inline DedupedFile parse_and_deduplicate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open input file: " + path.string());
  DedupedFile out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ConnectionRecord rec = parse_kdd_line(line, line_no);
    ++out.total_lines;
    if (seen.insert(duplicate_key(rec)).second) out.records.push_back(std::move(rec));
  }
  check(!out.records.empty(), path.string() + ": no records");
  return out;
}

inline LabeledDataset make_dataset(std::span<const ConnectionRecord> records,
                                   const Codebooks& books, const ScalingParams& scaler) {
  LabeledDataset ds;
  std::set<std::string> labels;
  for (const ConnectionRecord& rec : records) labels.insert(rec.label);
  ds.label_names.assign(labels.begin(), labels.end());
  std::map<std::string, std::uint32_t> id_of;
  for (std::uint32_t i = 0; i < ds.label_names.size(); ++i) id_of[ds.label_names[i]] = i;

  ds.x = FeatureMatrix(kNumAttributes);
  ds.x.values.reserve(records.size() * kNumAttributes);
  ds.label_ids.reserve(records.size());
  for (const ConnectionRecord& rec : records) {
    std::array<double, kNumAttributes> scaled = apply_scaler(encode(rec, books), scaler);
    ds.x.push_row(scaled);
    ds.label_ids.push_back(id_of[rec.label]);
  }
  return ds;
}

inline std::vector<std::string> dataset_labels(const LabeledDataset& ds) {
  std::vector<std::string> labels;
  labels.reserve(ds.label_ids.size());
  for (std::size_t i = 0; i < ds.label_ids.size(); ++i) labels.push_back(ds.label_of(i));
  return labels;
}

}  // namespace detail

inline PrepareSummary cmd_prepare(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  check(!cfg.train_file.empty(), "prepare: train_file not set");
  check(!cfg.test_file.empty(), "prepare: test_file not set");
  check(!cfg.data_dir.empty(), "prepare: data_dir not set");

  PrepareSummary summary;

  detail::DedupedFile train = detail::parse_and_deduplicate(cfg.train_file);
  summary.train_raw = train.total_lines;
  summary.train_dedup = train.records.size();

  detail::DedupedFile test = detail::parse_and_deduplicate(cfg.test_file);
  summary.test_raw = test.total_lines;
  summary.test_dedup = test.records.size();

  DownsampleResult down = downsample_dominant(train.records, cfg.downsample_factor, cfg.seed);
  summary.downsampled = down.classes;
  train.records.clear();

  DropRareResult filtered = drop_rare_classes(down.records, cfg.min_class_count);
  summary.removed_rare = filtered.removed;
  down.records.clear();
  summary.train_final = filtered.records.size();

  Codebooks books = build_codebooks(filtered.records);

  std::vector<std::array<double, kNumAttributes>> encoded;
  encoded.reserve(filtered.records.size());
  for (const ConnectionRecord& rec : filtered.records) encoded.push_back(encode(rec, books));
  if (cfg.paper_literal_scaling)
    for (const ConnectionRecord& rec : test.records) encoded.push_back(encode(rec, books));
  ScalingParams scaler = fit_scaler(encoded);
  encoded.clear();
  encoded.shrink_to_fit();

  Taxonomy taxonomy =
      cfg.taxonomy_file.empty() ? default_taxonomy() : load_taxonomy(cfg.taxonomy_file);
  std::vector<std::string> train_labels;
  train_labels.reserve(filtered.records.size());
  for (const ConnectionRecord& rec : filtered.records) train_labels.push_back(rec.label);
  std::vector<std::string> test_labels;
  test_labels.reserve(test.records.size());
  for (const ConnectionRecord& rec : test.records) test_labels.push_back(rec.label);
  LabelSpace space = build_label_space(train_labels, test_labels, taxonomy);
  summary.known_classes = space.known_classes.size();
  summary.unknown_classes = space.unknown_classes.size();

  fs::create_directories(cfg.data_dir);
  write_dataset(detail::make_dataset(filtered.records, books, scaler),
                fs::path(cfg.data_dir) / "train.osds");
  write_dataset(detail::make_dataset(test.records, books, scaler),
                fs::path(cfg.data_dir) / "test.osds");
  write_label_space(space, fs::path(cfg.data_dir) / "labels.txt");
  write_preproc_file(scaler, books, fs::path(cfg.data_dir) / "preproc.bin");
  {
    std::ofstream out(fs::path(cfg.data_dir) / "config.txt", std::ios::binary);
    out << serialize_config(cfg);
  }
  {
    std::ofstream out(fs::path(cfg.data_dir) / "prepare.txt", std::ios::binary);
    out << "train: " << summary.train_raw << " -> " << summary.train_dedup << " after dedup\n";
    out << "test: " << summary.test_raw << " -> " << summary.test_dedup << " after dedup\n";
    for (const DownsampledClass& c : summary.downsampled)
      out << "downsampled " << c.label << ": " << c.before << " -> " << c.after << '\n';
    for (const auto& [label, count] : summary.removed_rare)
      out << "removed rare class " << label << " (" << count << " records)\n";
    out << "final train records: " << summary.train_final << '\n';
    out << "known classes: " << summary.known_classes
        << ", unknown classes: " << summary.unknown_classes << '\n';
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Prepared-directory loading

struct PreparedData {
  LabeledDataset train;
  LabeledDataset test;
  LabelSpace space;
  ScalingParams scaler;
  Codebooks codebooks;
};

inline PreparedData load_prepared(const std::string& data_dir, bool with_train = true) {
  namespace fs = std::filesystem;
  check(!data_dir.empty(), "data_dir not set (pass --data-dir or set OSIR_DATA_DIR)");
  PreparedData data;
  if (with_train) data.train = read_dataset(fs::path(data_dir) / "train.osds");
  data.test = read_dataset(fs::path(data_dir) / "test.osds");
  data.space = read_label_space(fs::path(data_dir) / "labels.txt");
  std::tie(data.scaler, data.codebooks) = read_preproc_file(fs::path(data_dir) / "preproc.bin");
  return data;
}

// Class ids for training, resolved through the label space. Records whose
// label is not a known class are rejected: the training side must be closed.
inline std::vector<std::size_t> training_class_ids(const LabeledDataset& ds,
                                                   const LabelSpace& space) {
  std::vector<std::size_t> ids;
  ids.reserve(ds.label_ids.size());
  for (std::size_t i = 0; i < ds.label_ids.size(); ++i) {
    std::optional<std::size_t> id = space.class_index(ds.label_of(i));
    if (!id) fail("training record with unknown class '" + ds.label_of(i) + "'");
    ids.push_back(*id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// train

struct TrainSummary {
  std::string family;
  KernelParams params;
  bool grid_searched = false;
  std::string model_path;
};

inline TrainSummary cmd_train(const RunConfig& cfg, const std::string& family) {
  namespace fs = std::filesystem;
  check(family == "platt" || family == "wsvm", "train: family must be 'platt' or 'wsvm'");
  check(!cfg.out_dir.empty(), "train: out_dir not set");

  PreparedData data = load_prepared(cfg.data_dir);
  std::vector<std::size_t> ids = training_class_ids(data.train, data.space);
  std::size_t num_classes = data.space.known_classes.size();

  fs::create_directories(cfg.out_dir);

  KernelParams params = cfg.kernel;
  bool searched = false;
  if (cfg.grid_search) {
    std::vector<KernelParams> grid = cross_grid(cfg.grid_c, cfg.grid_gamma);
    GridSearchResult result =
        grid_search_cv(data.train.x, ids, num_classes, data.space.known_classes, grid,
                       cfg.grid_folds, cfg.seed, cfg.solver, cfg.workers);
    params = result.best;
    searched = true;
    std::ofstream out(fs::path(cfg.out_dir) / "grid.csv", std::ios::binary);
    out << "c,gamma,mean_cv_accuracy\n";
    for (const GridCell& cell : result.table)
      out << detail::format_double(cell.params.c) << ',' << detail::format_double(cell.params.gamma)
          << ',' << detail::format_double(cell.mean_accuracy) << '\n';
  }

  ModelArtifact artifact;
  artifact.family = family;
  artifact.class_names = data.space.known_classes;
  artifact.scaler = data.scaler;
  artifact.codebooks = data.codebooks;
  artifact.config_fingerprint = config_fingerprint(cfg);
  artifact.config_text = serialize_config(cfg);
  if (family == "platt")
    artifact.model = train_platt(data.train.x, ids, num_classes, params, cfg.calibration,
                                 cfg.solver, cfg.workers, data.space.known_classes);
  else
    artifact.model = train_wsvm(data.train.x, ids, num_classes, params, cfg.calibration,
                                cfg.solver, cfg.workers, data.space.known_classes);

  TrainSummary summary;
  summary.family = family;
  summary.params = params;
  summary.grid_searched = searched;
  summary.model_path = (fs::path(cfg.out_dir) / ("model_" + family + ".osmd")).string();
  save_model(artifact, summary.model_path);
  return summary;
}

// ---------------------------------------------------------------------------
// scoring + evaluate

inline std::vector<ScoredRecord> score_dataset(const ModelArtifact& artifact,
                                               const LabeledDataset& test, std::size_t workers) {
  std::vector<ScoredRecord> scored(test.x.rows());
  parallel_for_index(test.x.rows(), workers, [&](std::size_t i) {
    scored[i].truth = test.label_of(i);
    if (artifact.family == "platt")
      scored[i].probs = artifact.platt().class_probabilities(test.x.row(i));
    else
      scored[i].probs = artifact.wsvm().class_probabilities(test.x.row(i));
  });
  return scored;
}

namespace detail {

inline void verify_artifact(const ModelArtifact& artifact, const LabelSpace& space,
                            const std::string& path) {
  if (artifact.class_names != space.known_classes)
    fail(path + ": model class ordering does not match the prepared label space");
}

inline void emit_prediction_files(const RunConfig& cfg, const std::string& name,
                                  std::span<const ScoredRecord> scored,
                                  const LabelSpace& space) {
  namespace fs = std::filesystem;
  if (!cfg.emit_predictions) return;
  std::span<const std::string> per_class =
      cfg.per_class_probabilities ? std::span<const std::string>(space.known_classes)
                                  : std::span<const std::string>{};
  for (double t : cfg.thresholds) {
    std::vector<PredictionRow> rows;
    rows.reserve(scored.size());
    for (const ScoredRecord& rec : scored) {
      PredictionRow row;
      row.truth = rec.truth;
      row.predicted = decide_index(rec.probs, t);
      std::size_t best = 0;
      for (std::size_t k = 1; k < rec.probs.size(); ++k)
        if (rec.probs[k] > rec.probs[best]) best = k;
      row.max_probability = rec.probs.empty() ? 0 : rec.probs[best];
      row.threshold = t;
      if (!per_class.empty()) row.per_class = rec.probs;
      rows.push_back(std::move(row));
    }
    write_predictions(fs::path(cfg.out_dir) / ("predictions_" + name + "_t" + threshold_tag(t) + ".csv"),
                      rows, space.known_classes, per_class);
  }
}

}  // namespace detail

// Evaluates whichever artifacts are given (baseline first); with both
// present the report carries the cost-of-unknown comparison and crossover.
inline EvaluationReport cmd_evaluate(const RunConfig& cfg,
                                     const std::optional<std::string>& platt_path,
                                     const std::optional<std::string>& wsvm_path) {
  namespace fs = std::filesystem;
  check(platt_path || wsvm_path, "evaluate: no model artifact given");
  check(!cfg.out_dir.empty(), "evaluate: out_dir not set");
  check(std::is_sorted(cfg.thresholds.begin(), cfg.thresholds.end()),
        "evaluate: thresholds must be ascending");

  PreparedData data = load_prepared(cfg.data_dir, /*with_train=*/false);
  std::vector<double> weights = weight_grid(cfg.weight_step);

  fs::create_directories(cfg.out_dir);

  std::vector<ClassifierEvaluation> evals;
  for (const auto& [path, family] :
       {std::pair{platt_path, std::string("platt")}, std::pair{wsvm_path, std::string("wsvm")}}) {
    if (!path) continue;
    ModelArtifact artifact = load_model(*path);
    check(artifact.family == family,
          *path + ": expected a " + family + " artifact, found " + artifact.family);
    detail::verify_artifact(artifact, data.space, *path);
    std::vector<ScoredRecord> scored = score_dataset(artifact, data.test, cfg.workers);
    evals.push_back(
        evaluate_classifier(family, scored, cfg.thresholds, weights, data.space));
    detail::emit_prediction_files(cfg, family, scored, data.space);
  }

  EvaluationReport report = build_report(evals, weights, data.test.x.rows());
  write_report(report, cfg.out_dir);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "config.txt", std::ios::binary);
    out << serialize_config(cfg);
  }
  return report;
}

// ---------------------------------------------------------------------------
// desk experiment: scaled-down two-family comparison with forced unknowns

struct DeskSummary {
  std::vector<std::string> withheld;
  std::size_t train_records = 0;
  std::size_t test_records = 0;
  EvaluationReport report;
};

namespace detail {

// Stratified per-class cap via seeded sampling on a canonically ordered
// index list.
inline std::vector<std::size_t> cap_per_class(const LabeledDataset& ds, std::size_t cap,
                                              Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> members;  // ordered by label
  for (std::size_t i = 0; i < ds.label_ids.size(); ++i) members[ds.label_of(i)].push_back(i);
  std::vector<std::size_t> kept;
  for (auto& [label, idx] : members) {
    if (cap == 0 || idx.size() <= cap) {
      kept.insert(kept.end(), idx.begin(), idx.end());
    } else {
      for (std::size_t pick : sample_without_replacement(idx.size(), cap, rng))
        kept.push_back(idx[pick]);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace detail

inline DeskSummary cmd_desk_experiment(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  check(!cfg.out_dir.empty(), "desk-experiment: out_dir not set");
  PreparedData data = load_prepared(cfg.data_dir);

  // Which classes to withhold from training.
  std::set<std::string> train_classes(data.space.known_classes.begin(),
                                      data.space.known_classes.end());
  std::vector<std::string> withheld = cfg.desk_withhold;
  for (const std::string& name : withheld)
    if (!train_classes.count(name))
      fail("desk-experiment: withheld class '" + name + "' is not a training class");
  if (withheld.empty() && cfg.desk_withhold_count > 0) {
    // Default rule: the known exploit classes with the most test records;
    // "normal" is never withheld.
    std::map<std::string, std::size_t> test_counts;
    for (std::size_t i = 0; i < data.test.label_ids.size(); ++i) ++test_counts[data.test.label_of(i)];
    std::vector<std::pair<std::string, std::size_t>> candidates;
    for (const auto& [label, count] : test_counts)
      if (label != "normal" && train_classes.count(label)) candidates.push_back({label, count});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (candidates.size() < cfg.desk_withhold_count)
      fail("desk-experiment: only " + std::to_string(candidates.size()) +
           " candidate classes available to withhold, need " +
           std::to_string(cfg.desk_withhold_count));
    for (std::size_t i = 0; i < cfg.desk_withhold_count; ++i)
      withheld.push_back(candidates[i].first);
    std::sort(withheld.begin(), withheld.end());
  }
  std::set<std::string> withheld_set(withheld.begin(), withheld.end());

  Rng rng(cfg.seed);
  std::vector<std::size_t> train_keep = detail::cap_per_class(data.train, cfg.desk_train_cap, rng);
  std::vector<std::size_t> test_keep = detail::cap_per_class(data.test, cfg.desk_test_cap, rng);

  // Desk training set: capped subsample minus the withheld classes.
  FeatureMatrix train_x(data.train.x.dim);
  std::vector<std::string> train_labels;
  for (std::size_t i : train_keep) {
    if (withheld_set.count(data.train.label_of(i))) continue;
    train_x.push_row(data.train.x.row(i));
    train_labels.push_back(data.train.label_of(i));
  }
  check(!train_labels.empty(), "desk-experiment: empty training subsample");

  // Desk test set.
  LabeledDataset test;
  test.x = FeatureMatrix(data.test.x.dim);
  test.label_names = data.test.label_names;
  for (std::size_t i : test_keep) {
    test.x.push_row(data.test.x.row(i));
    test.label_ids.push_back(data.test.label_ids[i]);
  }

  // Label space after withholding: withheld classes become unknown.
  std::vector<std::string> test_labels = detail::dataset_labels(test);
  Taxonomy taxonomy;
  taxonomy.metatype = data.space.metatype_map;
  LabelSpace space = build_label_space(train_labels, test_labels, taxonomy);

  std::vector<std::size_t> ids;
  ids.reserve(train_labels.size());
  for (const std::string& label : train_labels) ids.push_back(*space.class_index(label));

  std::size_t num_classes = space.known_classes.size();
  std::vector<double> weights = weight_grid(cfg.weight_step);

  PlattModel platt = train_platt(train_x, ids, num_classes, cfg.kernel, cfg.calibration,
                                 cfg.solver, cfg.workers, space.known_classes);
  WsvmModel wsvm = train_wsvm(train_x, ids, num_classes, cfg.kernel, cfg.calibration,
                              cfg.solver, cfg.workers, space.known_classes);

  std::vector<ScoredRecord> platt_scored(test.x.rows()), wsvm_scored(test.x.rows());
  parallel_for_index(test.x.rows(), cfg.workers, [&](std::size_t i) {
    platt_scored[i] = {test.label_of(i), platt.class_probabilities(test.x.row(i))};
    wsvm_scored[i] = {test.label_of(i), wsvm.class_probabilities(test.x.row(i))};
  });

  std::vector<ClassifierEvaluation> evals;
  evals.push_back(evaluate_classifier("platt", platt_scored, cfg.thresholds, weights, space));
  evals.push_back(evaluate_classifier("wsvm", wsvm_scored, cfg.thresholds, weights, space));

  DeskSummary summary;
  summary.withheld = withheld;
  summary.train_records = train_labels.size();
  summary.test_records = test.x.rows();
  summary.report = build_report(evals, weights, test.x.rows());

  fs::create_directories(cfg.out_dir);
  write_report(summary.report, cfg.out_dir);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "desk.txt", std::ios::binary);
    out << "withheld classes:";
    for (const std::string& name : withheld) out << ' ' << name;
    out << '\n';
    out << "train records: " << summary.train_records << '\n';
    out << "test records: " << summary.test_records << '\n';
  }
  {
    std::ofstream out(fs::path(cfg.out_dir) / "config.txt", std::ios::binary);
    out << serialize_config(cfg);
  }
  return summary;
}

}  // namespace osir
