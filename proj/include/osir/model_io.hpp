#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "osir/dataset_io.hpp"
#include "osir/error.hpp"
#include "osir/openset.hpp"
#include "osir/preprocess.hpp"

namespace osir {

// A trained model artifact: either family plus everything inference needs
// (class ordering, scaler, codebooks) and the fingerprint of the config that
// produced it.
struct ModelArtifact {
  std::string family;  // "platt" or "wsvm"
  std::vector<std::string> class_names;
  ScalingParams scaler;
  Codebooks codebooks;
  std::uint64_t config_fingerprint = 0;
  std::string config_text;
  std::variant<PlattModel, WsvmModel> model;

  const PlattModel& platt() const { return std::get<PlattModel>(model); }
  const WsvmModel& wsvm() const { return std::get<WsvmModel>(model); }
};

inline constexpr char kModelMagic[9] = "OSIRMD1\n";
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_matrix(std::ostream& out, const FeatureMatrix& m) {
  put_u32(out, static_cast<std::uint32_t>(m.dim));
  put_u64(out, m.rows());
  for (double v : m.values) put_f64(out, v);
}

inline FeatureMatrix get_matrix(std::istream& in, const std::string& where) {
  FeatureMatrix m(get_u32(in, where));
  std::uint64_t rows = get_u64(in, where);
  m.values.resize(static_cast<std::size_t>(rows) * m.dim);
  for (double& v : m.values) v = get_f64(in, where);
  return m;
}

inline void put_binary_svm(std::ostream& out, const BinarySvmModel& m) {
  put_f64(out, m.kernel.c);
  put_f64(out, m.kernel.gamma);
  put_f64(out, m.bias);
  put_f64(out, m.objective);
  put_matrix(out, m.support_vectors);
  for (double c : m.dual_coefficients) put_f64(out, c);
}

inline BinarySvmModel get_binary_svm(std::istream& in, const std::string& where) {
  BinarySvmModel m;
  m.kernel.c = get_f64(in, where);
  m.kernel.gamma = get_f64(in, where);
  m.bias = get_f64(in, where);
  m.objective = get_f64(in, where);
  m.support_vectors = get_matrix(in, where);
  m.dual_coefficients.resize(m.support_vectors.rows());
  for (double& c : m.dual_coefficients) c = get_f64(in, where);
  return m;
}

inline void put_weibull(std::ostream& out, const WeibullModel& w) {
  put_f64(out, w.shape);
  put_f64(out, w.scale);
  put_f64(out, w.location);
  put_u8(out, w.orientation == TailSide::lower ? 0 : 1);
}

inline WeibullModel get_weibull(std::istream& in, const std::string& where) {
  WeibullModel w;
  w.shape = get_f64(in, where);
  w.scale = get_f64(in, where);
  w.location = get_f64(in, where);
  w.orientation = get_u8(in, where) == 0 ? TailSide::lower : TailSide::upper;
  return w;
}

inline void put_one_class(std::ostream& out, const OneClassModel& m) {
  put_f64(out, m.gamma);
  put_f64(out, m.offset);
  put_matrix(out, m.support_vectors);
  for (double c : m.coefficients) put_f64(out, c);
}

inline OneClassModel get_one_class(std::istream& in, const std::string& where) {
  OneClassModel m;
  m.gamma = get_f64(in, where);
  m.offset = get_f64(in, where);
  m.support_vectors = get_matrix(in, where);
  m.coefficients.resize(m.support_vectors.rows());
  for (double& c : m.coefficients) c = get_f64(in, where);
  return m;
}

}  // namespace detail

inline void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write model file: " + path.string());
  out.write(kModelMagic, 8);
  detail::put_u32(out, kModelVersion);
  detail::put_string(out, artifact.family);
  detail::put_u64(out, artifact.config_fingerprint);
  detail::put_string(out, artifact.config_text);
  detail::put_u32(out, static_cast<std::uint32_t>(artifact.class_names.size()));
  for (const std::string& name : artifact.class_names) detail::put_string(out, name);
  write_preproc(out, artifact.scaler, artifact.codebooks);

  if (artifact.family == "platt") {
    const PlattModel& m = artifact.platt();
    detail::put_f64(out, m.kernel.c);
    detail::put_f64(out, m.kernel.gamma);
    for (std::size_t k = 0; k < m.binaries.size(); ++k) {
      detail::put_binary_svm(out, m.binaries[k]);
      detail::put_f64(out, m.calibrators[k].a);
      detail::put_f64(out, m.calibrators[k].b);
    }
  } else if (artifact.family == "wsvm") {
    const WsvmModel& m = artifact.wsvm();
    detail::put_f64(out, m.kernel.c);
    detail::put_f64(out, m.kernel.gamma);
    for (const WsvmClassModel& cm : m.classes) {
      detail::put_binary_svm(out, cm.binary);
      detail::put_weibull(out, cm.eta);
      detail::put_weibull(out, cm.psi);
      detail::put_one_class(out, cm.gate.one_class);
      detail::put_weibull(out, cm.gate.weibull);
      detail::put_f64(out, cm.gate.delta_tau);
    }
  } else {
    fail("save_model: unknown family '" + artifact.family + "'");
  }
  if (!out) fail("write failed: " + path.string());
}

inline ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open model file: " + path.string());
  const std::string where = path.string();
  detail::expect_magic(in, kModelMagic, where);
  std::uint32_t version = detail::get_u32(in, where);
  if (version != kModelVersion)
    fail(where + ": unsupported model version " + std::to_string(version));

  ModelArtifact artifact;
  artifact.family = detail::get_string(in, where);
  artifact.config_fingerprint = detail::get_u64(in, where);
  artifact.config_text = detail::get_string(in, where);
  std::uint32_t n_classes = detail::get_u32(in, where);
  for (std::uint32_t k = 0; k < n_classes; ++k)
    artifact.class_names.push_back(detail::get_string(in, where));
  std::tie(artifact.scaler, artifact.codebooks) = read_preproc(in, where);

  if (artifact.family == "platt") {
    PlattModel m;
    m.kernel.c = detail::get_f64(in, where);
    m.kernel.gamma = detail::get_f64(in, where);
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      m.binaries.push_back(detail::get_binary_svm(in, where));
      PlattCalibrator cal;
      cal.a = detail::get_f64(in, where);
      cal.b = detail::get_f64(in, where);
      m.calibrators.push_back(cal);
    }
    artifact.model = std::move(m);
  } else if (artifact.family == "wsvm") {
    WsvmModel m;
    m.kernel.c = detail::get_f64(in, where);
    m.kernel.gamma = detail::get_f64(in, where);
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      WsvmClassModel cm;
      cm.binary = detail::get_binary_svm(in, where);
      cm.eta = detail::get_weibull(in, where);
      cm.psi = detail::get_weibull(in, where);
      cm.gate.one_class = detail::get_one_class(in, where);
      cm.gate.weibull = detail::get_weibull(in, where);
      cm.gate.delta_tau = detail::get_f64(in, where);
      m.classes.push_back(std::move(cm));
    }
    artifact.model = std::move(m);
  } else {
    fail(where + ": unknown model family '" + artifact.family + "'");
  }
  return artifact;
}

}  // namespace osir
