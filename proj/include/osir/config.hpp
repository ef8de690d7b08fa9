#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/kernel.hpp"
#include "osir/openset.hpp"
#include "osir/smo.hpp"
#include "osir/text.hpp"

namespace osir {

// Everything a run needs, serializable to a human-editable "key = value"
// file. A persisted config re-runs to identical outputs.
struct RunConfig {
  // paths
  std::string train_file;
  std::string test_file;
  std::string taxonomy_file;
  std::string data_dir;  // prepared dataset directory
  std::string out_dir;   // report directory

  // preprocessing
  std::uint64_t downsample_factor = 100;
  std::size_t min_class_count = 20;
  std::uint64_t seed = 42;
  bool paper_literal_scaling = false;  // fit the scaler on train+test combined

  // kernel / grid search
  KernelParams kernel;
  bool grid_search = false;
  std::vector<double> grid_c = {1e-5, 1e-3, 1e-1, 1e1, 1e3, 1e5};
  std::vector<double> grid_gamma = {1e-5, 1e-3, 1e-1, 1e1, 1e3, 1e5};
  std::size_t grid_folds = 3;

  // calibration
  CalibrationConfig calibration;

  // solver
  SolverConfig solver;

  // evaluation
  std::vector<double> thresholds = {0.1, 0.2, 0.3};
  double weight_step = 0.01;
  bool emit_predictions = false;
  bool per_class_probabilities = false;

  // desk experiment
  std::size_t desk_train_cap = 600;
  std::size_t desk_test_cap = 400;
  std::size_t desk_withhold_count = 3;
  std::vector<std::string> desk_withhold;  // explicit class list; overrides the count rule

  std::size_t workers = 1;
};

namespace detail {

inline std::string join_doubles(std::span<const double> values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  return out.str();
}

inline std::string join_strings(std::span<const std::string> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += values[i];
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_double(tok, "config key '" + key + "'"));
  }
  return out;
}

inline std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

inline bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail("config key '" + key + "': expected a boolean, got '" + text + "'");
}

}  // namespace detail

// Canonical text form; also the fingerprint input. Field order is fixed.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "train_file = " << cfg.train_file << '\n';
  out << "test_file = " << cfg.test_file << '\n';
  out << "taxonomy_file = " << cfg.taxonomy_file << '\n';
  out << "data_dir = " << cfg.data_dir << '\n';
  out << "out_dir = " << cfg.out_dir << '\n';
  out << "downsample_factor = " << cfg.downsample_factor << '\n';
  out << "min_class_count = " << cfg.min_class_count << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "paper_literal_scaling = " << (cfg.paper_literal_scaling ? "true" : "false") << '\n';
  out << "c = " << detail::format_double(cfg.kernel.c) << '\n';
  out << "gamma = " << detail::format_double(cfg.kernel.gamma) << '\n';
  out << "grid_search = " << (cfg.grid_search ? "true" : "false") << '\n';
  out << "grid_c = " << detail::join_doubles(cfg.grid_c) << '\n';
  out << "grid_gamma = " << detail::join_doubles(cfg.grid_gamma) << '\n';
  out << "grid_folds = " << cfg.grid_folds << '\n';
  out << "calibration_folds = " << cfg.calibration.folds << '\n';
  out << "tail_size = " << cfg.calibration.tail_size << '\n';
  out << "delta_tau = " << detail::format_double(cfg.calibration.delta_tau) << '\n';
  out << "nu = " << detail::format_double(cfg.calibration.nu) << '\n';
  out << "solver_tolerance = " << detail::format_double(cfg.solver.tolerance) << '\n';
  out << "solver_max_iterations = " << cfg.solver.max_iterations << '\n';
  out << "solver_cache_bytes = " << cfg.solver.cache_bytes << '\n';
  out << "thresholds = " << detail::join_doubles(cfg.thresholds) << '\n';
  out << "weight_step = " << detail::format_double(cfg.weight_step) << '\n';
  out << "emit_predictions = " << (cfg.emit_predictions ? "true" : "false") << '\n';
  out << "per_class_probabilities = " << (cfg.per_class_probabilities ? "true" : "false") << '\n';
  out << "desk_train_cap = " << cfg.desk_train_cap << '\n';
  out << "desk_test_cap = " << cfg.desk_test_cap << '\n';
  out << "desk_withhold_count = " << cfg.desk_withhold_count << '\n';
  out << "desk_withhold = " << detail::join_strings(cfg.desk_withhold) << '\n';
  out << "workers = " << cfg.workers << '\n';
  return out.str();
}

// FNV-1a over the canonical text.
inline std::uint64_t config_fingerprint(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Applies "key = value" lines onto cfg; unknown keys are errors so typos
// do not silently change a run.
inline void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto to_u64 = [&](const std::string& v) {
    char* end = nullptr;
    std::uint64_t r = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty())
      fail("config key '" + key + "': expected an integer, got '" + v + "'");
    return r;
  };

  if (key == "train_file") cfg.train_file = value;
  else if (key == "test_file") cfg.test_file = value;
  else if (key == "taxonomy_file") cfg.taxonomy_file = value;
  else if (key == "data_dir") cfg.data_dir = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "downsample_factor") cfg.downsample_factor = to_u64(value);
  else if (key == "min_class_count") cfg.min_class_count = static_cast<std::size_t>(to_u64(value));
  else if (key == "seed") cfg.seed = to_u64(value);
  else if (key == "paper_literal_scaling") cfg.paper_literal_scaling = detail::parse_bool(value, key);
  else if (key == "c") cfg.kernel.c = detail::parse_double(value, key);
  else if (key == "gamma") cfg.kernel.gamma = detail::parse_double(value, key);
  else if (key == "grid_search") cfg.grid_search = detail::parse_bool(value, key);
  else if (key == "grid_c") cfg.grid_c = detail::parse_double_list(value, key);
  else if (key == "grid_gamma") cfg.grid_gamma = detail::parse_double_list(value, key);
  else if (key == "grid_folds") cfg.grid_folds = static_cast<std::size_t>(to_u64(value));
  else if (key == "calibration_folds") cfg.calibration.folds = static_cast<std::size_t>(to_u64(value));
  else if (key == "tail_size") cfg.calibration.tail_size = static_cast<std::size_t>(to_u64(value));
  else if (key == "delta_tau") cfg.calibration.delta_tau = detail::parse_double(value, key);
  else if (key == "nu") cfg.calibration.nu = detail::parse_double(value, key);
  else if (key == "solver_tolerance") cfg.solver.tolerance = detail::parse_double(value, key);
  else if (key == "solver_max_iterations") cfg.solver.max_iterations = to_u64(value);
  else if (key == "solver_cache_bytes") cfg.solver.cache_bytes = static_cast<std::size_t>(to_u64(value));
  else if (key == "thresholds") cfg.thresholds = detail::parse_double_list(value, key);
  else if (key == "weight_step") cfg.weight_step = detail::parse_double(value, key);
  else if (key == "emit_predictions") cfg.emit_predictions = detail::parse_bool(value, key);
  else if (key == "per_class_probabilities") cfg.per_class_probabilities = detail::parse_bool(value, key);
  else if (key == "desk_train_cap") cfg.desk_train_cap = static_cast<std::size_t>(to_u64(value));
  else if (key == "desk_test_cap") cfg.desk_test_cap = static_cast<std::size_t>(to_u64(value));
  else if (key == "desk_withhold_count") cfg.desk_withhold_count = static_cast<std::size_t>(to_u64(value));
  else if (key == "desk_withhold") cfg.desk_withhold = detail::parse_string_list(value);
  else if (key == "workers") cfg.workers = static_cast<std::size_t>(to_u64(value));
  else fail("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, RunConfig cfg = {},
                              const std::string& origin = "<config>") {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") != std::string::npos)
        fail(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string{};
      std::size_t b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path.string());
  return parse_config(in, std::move(base), path.string());
}

}  // namespace osir
