// Command-line driver for the open-set intrusion recognition pipeline:
//   prepare | train | evaluate | desk-experiment | self-check

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osir/osir.hpp"

namespace {

// --config is applied before flag binding so explicit flags override it.
osir::RunConfig base_config(int argc, char** argv) {
  osir::RunConfig cfg;
  if (const char* dir = std::getenv("OSIR_DATA_DIR")) cfg.data_dir = dir;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") cfg = osir::load_config(argv[i + 1], cfg);
  return cfg;
}

struct ListOptions {
  std::string thresholds;
  std::string grid_c;
  std::string grid_gamma;
  std::string withhold;
};

void apply_lists(osir::RunConfig& cfg, const ListOptions& lists) {
  if (!lists.thresholds.empty())
    cfg.thresholds = osir::detail::parse_double_list(lists.thresholds, "thresholds");
  if (!lists.grid_c.empty()) cfg.grid_c = osir::detail::parse_double_list(lists.grid_c, "grid_c");
  if (!lists.grid_gamma.empty())
    cfg.grid_gamma = osir::detail::parse_double_list(lists.grid_gamma, "grid_gamma");
  if (!lists.withhold.empty()) cfg.desk_withhold = osir::detail::parse_string_list(lists.withhold);
}

void add_common(CLI::App* cmd, osir::RunConfig& cfg) {
  cmd->add_option("--config", "config file applied before other flags")->expected(1);
  cmd->add_option("--data-dir", cfg.data_dir, "prepared dataset directory");
  cmd->add_option("--seed", cfg.seed, "seed for all randomized steps");
  cmd->add_option("--workers", cfg.workers, "worker threads for independent sub-tasks");
}

void print_prepare_summary(const osir::PrepareSummary& summary) {
  std::cout << "train: " << summary.train_raw << " -> " << summary.train_dedup
            << " after dedup\n";
  std::cout << "test: " << summary.test_raw << " -> " << summary.test_dedup << " after dedup\n";
  for (const osir::DownsampledClass& c : summary.downsampled)
    std::cout << "downsampled " << c.label << ": " << c.before << " -> " << c.after << '\n';
  for (const auto& [label, count] : summary.removed_rare)
    std::cout << "removed rare class " << label << " (" << count << " records)\n";
  std::cout << "final train records: " << summary.train_final << '\n';
  std::cout << "known classes: " << summary.known_classes
            << ", unknown classes: " << summary.unknown_classes << '\n';
}

void print_report_summary(const osir::EvaluationReport& report) {
  for (const osir::ClassifierEvaluation& cls : report.classifiers) {
    std::cout << cls.name << ": closed-set accuracy "
              << osir::detail::format_double(cls.closed_accuracy) << '\n';
    for (const osir::OpenSetAccuracy& row : cls.sweep) {
      std::cout << "  threshold " << osir::threshold_tag(row.threshold)
                << ": open=" << osir::detail::format_double(row.open)
                << " known=" << (row.known ? osir::detail::format_double(*row.known) : "n/a")
                << " unknown=" << (row.unknown ? osir::detail::format_double(*row.unknown) : "n/a")
                << '\n';
    }
  }
  for (std::size_t i = 0; i < report.crossover.size(); ++i) {
    std::cout << "crossover at threshold "
              << osir::threshold_tag(report.classifiers[0].sweep[i].threshold) << ": ";
    if (report.crossover[i])
      std::cout << osir::detail::format_double(*report.crossover[i]) << '\n';
    else
      std::cout << "none\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open-set intrusion recognition pipeline"};
  app.require_subcommand(1);

  osir::RunConfig cfg;
  try {
    cfg = base_config(argc, argv);
  } catch (const osir::Error& e) {
    std::cerr << "osir: error: " << e.what() << '\n';
    return 1;
  }
  ListOptions lists;

  // prepare
  CLI::App* prepare = app.add_subcommand("prepare", "parse, dedup, filter, encode and scale");
  add_common(prepare, cfg);
  prepare->add_option("--train", cfg.train_file, "raw KDD-format training file");
  prepare->add_option("--test", cfg.test_file, "raw KDD-format test file");
  prepare->add_option("--taxonomy", cfg.taxonomy_file, "exploit->metatype table");
  prepare->add_option("--downsample-factor", cfg.downsample_factor,
                      "cut the two dominant classes by this factor");
  prepare->add_option("--min-class-count", cfg.min_class_count,
                      "drop training classes smaller than this");
  prepare->add_flag("--paper-literal-scaling", cfg.paper_literal_scaling,
                    "fit the min-max scaler on train+test combined");

  // train
  CLI::App* train = app.add_subcommand("train", "train a platt or wsvm model");
  add_common(train, cfg);
  std::string family;
  train->add_option("--family", family, "platt or wsvm")->required();
  train->add_option("--out", cfg.out_dir, "output directory for the model artifact");
  train->add_option("--c", cfg.kernel.c, "soft-margin penalty");
  train->add_option("--gamma", cfg.kernel.gamma, "RBF width");
  bool grid_flag = false;
  train->add_flag("--grid-search", grid_flag, "cross-validated grid search for C and gamma");
  train->add_option("--grid-c", lists.grid_c, "comma-separated C grid");
  train->add_option("--grid-gamma", lists.grid_gamma, "comma-separated gamma grid");
  train->add_option("--grid-folds", cfg.grid_folds, "grid search folds");
  train->add_option("--calibration-folds", cfg.calibration.folds, "calibration CV folds");
  train->add_option("--tail-size", cfg.calibration.tail_size,
                    "calibration tail size (0 = half the scores)");
  train->add_option("--delta-tau", cfg.calibration.delta_tau, "CAP gate threshold");
  train->add_option("--nu", cfg.calibration.nu, "one-class fraction");
  train->add_option("--solver-tolerance", cfg.solver.tolerance, "KKT stopping tolerance");
  train->add_option("--cache-bytes", cfg.solver.cache_bytes, "kernel row cache budget");

  // evaluate
  CLI::App* evaluate = app.add_subcommand("evaluate", "closed/open scoring and report emission");
  add_common(evaluate, cfg);
  std::string platt_path, wsvm_path;
  evaluate->add_option("--platt-model", platt_path, "platt model artifact");
  evaluate->add_option("--wsvm-model", wsvm_path, "wsvm model artifact");
  evaluate->add_option("--out", cfg.out_dir, "report directory");
  evaluate->add_option("--thresholds", lists.thresholds, "comma-separated rejection thresholds");
  evaluate->add_option("--weight-step", cfg.weight_step, "cost-of-unknown weight grid step");
  evaluate->add_flag("--emit-predictions", cfg.emit_predictions, "write per-query prediction CSVs");
  evaluate->add_flag("--per-class-probs", cfg.per_class_probabilities,
                     "include per-class probabilities in prediction CSVs");
  bool eval_self_check = false;
  evaluate->add_flag("--self-check", eval_self_check, "assert report identities after writing");

  // desk-experiment
  CLI::App* desk = app.add_subcommand(
      "desk-experiment", "scaled-down platt/wsvm comparison with withheld classes");
  add_common(desk, cfg);
  desk->add_option("--out", cfg.out_dir, "report directory");
  desk->add_option("--train-cap", cfg.desk_train_cap, "max training records per class");
  desk->add_option("--test-cap", cfg.desk_test_cap, "max test records per class");
  desk->add_option("--withhold", lists.withhold, "comma-separated classes to withhold");
  desk->add_option("--withhold-count", cfg.desk_withhold_count,
                   "how many classes to withhold when --withhold is not given");
  desk->add_option("--c", cfg.kernel.c, "soft-margin penalty");
  desk->add_option("--gamma", cfg.kernel.gamma, "RBF width");
  desk->add_option("--thresholds", lists.thresholds, "comma-separated rejection thresholds");
  desk->add_option("--weight-step", cfg.weight_step, "cost-of-unknown weight grid step");

  // self-check
  CLI::App* self_check = app.add_subcommand("self-check", "re-validate an emitted report");
  std::string report_dir;
  self_check->add_option("--report-dir", report_dir, "report directory to validate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_lists(cfg, lists);
    if (prepare->parsed()) {
      print_prepare_summary(osir::cmd_prepare(cfg));
    } else if (train->parsed()) {
      cfg.grid_search = cfg.grid_search || grid_flag;
      osir::TrainSummary summary = osir::cmd_train(cfg, family);
      std::cout << "trained " << summary.family << " model: " << summary.model_path << '\n';
      std::cout << "kernel: C=" << osir::detail::format_double(summary.params.c)
                << " gamma=" << osir::detail::format_double(summary.params.gamma)
                << (summary.grid_searched ? " (grid searched)" : "") << '\n';
    } else if (evaluate->parsed()) {
      std::optional<std::string> platt_opt, wsvm_opt;
      if (!platt_path.empty()) platt_opt = platt_path;
      if (!wsvm_path.empty()) wsvm_opt = wsvm_path;
      osir::EvaluationReport report = osir::cmd_evaluate(cfg, platt_opt, wsvm_opt);
      print_report_summary(report);
      std::cout << "report written to " << cfg.out_dir << '\n';
      if (eval_self_check) {
        std::vector<std::string> bad = osir::report_identity_violations(report);
        std::vector<std::string> bad_files = osir::self_check_report_dir(cfg.out_dir);
        bad.insert(bad.end(), bad_files.begin(), bad_files.end());
        if (!bad.empty()) {
          for (const std::string& msg : bad) std::cerr << "osir: self-check failed: " << msg << '\n';
          return 2;
        }
        std::cout << "self-check: all identities hold\n";
      }
    } else if (desk->parsed()) {
      osir::DeskSummary summary = osir::cmd_desk_experiment(cfg);
      std::cout << "withheld:";
      for (const std::string& name : summary.withheld) std::cout << ' ' << name;
      std::cout << '\n';
      std::cout << "desk train records: " << summary.train_records
                << ", test records: " << summary.test_records << '\n';
      print_report_summary(summary.report);
      std::cout << "report written to " << cfg.out_dir << '\n';
    } else if (self_check->parsed()) {
      std::vector<std::string> bad = osir::self_check_report_dir(report_dir);
      if (!bad.empty()) {
        for (const std::string& msg : bad) std::cerr << "osir: self-check failed: " << msg << '\n';
        return 2;
      }
      std::cout << "self-check: all identities hold\n";
    }
  } catch (const osir::Error& e) {
    std::cerr << "osir: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "osir: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
