#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/ingest.hpp"
#include "osir/matrix.hpp"
#include "osir/preprocess.hpp"

namespace osir {

// ---------------------------------------------------------------------------
// Little-endian primitives (explicit byte order, independent of host)

namespace detail {

inline void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint8_t get_u8(std::istream& in, const std::string& where) {
  int c = in.get();
  if (c == EOF) fail(where + ": truncated file");
  return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& in, const std::string& where) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(where + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& in, const std::string& where) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(where + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in, const std::string& where) {
  return std::bit_cast<double>(get_u64(in, where));
}

inline std::string get_string(std::istream& in, const std::string& where) {
  std::uint32_t len = get_u32(in, where);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) fail(where + ": truncated file");
  return s;
}

inline void expect_magic(std::istream& in, const char* magic, const std::string& where) {
  char buf[8];
  if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
    fail(where + ": not a recognized file (bad magic)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Columnar dataset file
//
// Layout (all integers little-endian, doubles as IEEE-754 bits):
//   magic  "OSIRDS1\n"
//   u32    format version (1)
//   u32    feature count
//   u64    record count
//   u32    label-table size, then that many length-prefixed label strings
//   u32[n] per-record label ids
//   f64[n] per feature column (column-major)

struct LabeledDataset {
  FeatureMatrix x;                       // row-major in memory
  std::vector<std::uint32_t> label_ids;  // into label_names
  std::vector<std::string> label_names;

  const std::string& label_of(std::size_t row) const { return label_names[label_ids[row]]; }
};

inline constexpr char kDatasetMagic[9] = "OSIRDS1\n";
inline constexpr std::uint32_t kDatasetVersion = 1;

inline void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write dataset file: " + path.string());
  out.write(kDatasetMagic, 8);
  detail::put_u32(out, kDatasetVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.x.dim));
  detail::put_u64(out, ds.x.rows());
  detail::put_u32(out, static_cast<std::uint32_t>(ds.label_names.size()));
  for (const std::string& name : ds.label_names) detail::put_string(out, name);
  for (std::uint32_t id : ds.label_ids) detail::put_u32(out, id);
  for (std::size_t col = 0; col < ds.x.dim; ++col)
    for (std::size_t row = 0; row < ds.x.rows(); ++row)
      detail::put_f64(out, ds.x.values[row * ds.x.dim + col]);
  if (!out) fail("write failed: " + path.string());
}

inline LabeledDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open dataset file: " + path.string());
  const std::string where = path.string();
  detail::expect_magic(in, kDatasetMagic, where);
  std::uint32_t version = detail::get_u32(in, where);
  if (version != kDatasetVersion)
    fail(where + ": unsupported dataset version " + std::to_string(version));

  LabeledDataset ds;
  std::uint32_t dim = detail::get_u32(in, where);
  std::uint64_t rows = detail::get_u64(in, where);
  std::uint32_t n_labels = detail::get_u32(in, where);
  ds.label_names.reserve(n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) ds.label_names.push_back(detail::get_string(in, where));
  ds.label_ids.resize(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    ds.label_ids[i] = detail::get_u32(in, where);
    if (ds.label_ids[i] >= n_labels) fail(where + ": label id out of range");
  }
  ds.x = FeatureMatrix(dim);
  ds.x.values.resize(static_cast<std::size_t>(rows) * dim);
  for (std::uint32_t col = 0; col < dim; ++col)
    for (std::uint64_t row = 0; row < rows; ++row)
      ds.x.values[static_cast<std::size_t>(row) * dim + col] = detail::get_f64(in, where);
  return ds;
}

// ---------------------------------------------------------------------------
// Label space file (plain text, documented in the README)

inline void write_label_space(const LabelSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write label space file: " + path.string());
  out << "# known <class> <metatype> | unknown <class> <metatype>\n";
  for (const std::string& name : space.known_classes) {
    auto it = space.metatype_map.find(name);
    out << "known " << name << ' ' << (it == space.metatype_map.end() ? "unlisted" : it->second)
        << '\n';
  }
  for (const std::string& name : space.unknown_classes) {
    auto it = space.metatype_map.find(name);
    out << "unknown " << name << ' ' << (it == space.metatype_map.end() ? "unlisted" : it->second)
        << '\n';
  }
}

inline LabelSpace read_label_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open label space file: " + path.string());
  LabelSpace space;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string kind, name, meta;
    if (!(fields >> kind >> name >> meta) || (kind != "known" && kind != "unknown"))
      fail(path.string() + ":" + std::to_string(line_no) + ": bad label space line");
    (kind == "known" ? space.known_classes : space.unknown_classes).push_back(name);
    space.metatype_map[name] = meta;
  }
  check(std::is_sorted(space.known_classes.begin(), space.known_classes.end()),
        path.string() + ": known classes out of order");
  check(std::is_sorted(space.unknown_classes.begin(), space.unknown_classes.end()),
        path.string() + ": unknown classes out of order");
  return space;
}

// ---------------------------------------------------------------------------
// Preprocessing parameters file (scaler + codebooks), reused by the model
// artifact so inference applies the exact training-time transform.

inline constexpr char kPreprocMagic[9] = "OSIRPP1\n";

inline void write_preproc(std::ostream& out, const ScalingParams& scaler, const Codebooks& books) {
  out.write(kPreprocMagic, 8);
  detail::put_u32(out, 1);
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    detail::put_f64(out, scaler.min[a]);
    detail::put_f64(out, scaler.max[a]);
  }
  for (const CategoricalCodebook& book : books) {
    detail::put_u32(out, static_cast<std::uint32_t>(book.tokens.size()));
    for (const std::string& tok : book.tokens) detail::put_string(out, tok);
  }
}

inline std::pair<ScalingParams, Codebooks> read_preproc(std::istream& in,
                                                        const std::string& where) {
  detail::expect_magic(in, kPreprocMagic, where);
  std::uint32_t version = detail::get_u32(in, where);
  if (version != 1) fail(where + ": unsupported preprocessing version");
  ScalingParams scaler;
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    scaler.min[a] = detail::get_f64(in, where);
    scaler.max[a] = detail::get_f64(in, where);
  }
  Codebooks books;
  for (CategoricalCodebook& book : books) {
    std::uint32_t n = detail::get_u32(in, where);
    for (std::uint32_t i = 0; i < n; ++i) book.tokens.push_back(detail::get_string(in, where));
  }
  return {scaler, books};
}

inline void write_preproc_file(const ScalingParams& scaler, const Codebooks& books,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write preprocessing file: " + path.string());
  write_preproc(out, scaler, books);
}

inline std::pair<ScalingParams, Codebooks> read_preproc_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open preprocessing file: " + path.string());
  return read_preproc(in, path.string());
}

}  // namespace osir
