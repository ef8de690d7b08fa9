#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "osir/error.hpp"
#include "osir/record.hpp"
#include "osir/schema.hpp"

namespace osir {

// ---------------------------------------------------------------------------
// Deduplication

// Keeps the first occurrence of each exact duplicate (all 41 attributes and
// the label), preserving input order. Train and test sets are deduplicated
// independently by their callers.
inline std::vector<ConnectionRecord> deduplicate(std::span<const ConnectionRecord> records) {
  std::vector<ConnectionRecord> out;
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (const ConnectionRecord& rec : records) {
    if (seen.insert(duplicate_key(rec)).second) out.push_back(rec);
  }
  return out;
}

inline std::vector<ConnectionRecord> deduplicate(const std::vector<ConnectionRecord>& records) {
  return deduplicate(std::span<const ConnectionRecord>(records));
}

// ---------------------------------------------------------------------------
// Categorical encoding

// Per-attribute token list observed in training, sorted lexicographically.
// Unknown tokens map to overflow_index() == tokens.size().
struct CategoricalCodebook {
  std::vector<std::string> tokens;

  std::size_t overflow_index() const { return tokens.size(); }

  std::size_t index_of(std::string_view tok) const {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), tok);
    if (it != tokens.end() && *it == tok) return static_cast<std::size_t>(it - tokens.begin());
    return overflow_index();
  }
};

using Codebooks = std::array<CategoricalCodebook, kCategoricalAttributes.size()>;

inline Codebooks build_codebooks(std::span<const ConnectionRecord> train) {
  check(!train.empty(), "build_codebooks: empty training set");
  std::array<std::set<std::string>, kCategoricalAttributes.size()> seen;
  for (const ConnectionRecord& rec : train)
    for (std::size_t slot = 0; slot < kCategoricalAttributes.size(); ++slot)
      seen[slot].insert(rec.cat[slot]);
  Codebooks books;
  for (std::size_t slot = 0; slot < kCategoricalAttributes.size(); ++slot)
    books[slot].tokens.assign(seen[slot].begin(), seen[slot].end());
  return books;
}

// Raw numeric vector: token attributes replaced by their codebook index,
// numeric attributes passed through unchanged.
inline std::array<double, kNumAttributes> encode(const ConnectionRecord& rec, const Codebooks& books) {
  std::array<double, kNumAttributes> out = rec.num;
  for (std::size_t slot = 0; slot < kCategoricalAttributes.size(); ++slot)
    out[kCategoricalAttributes[slot]] = static_cast<double>(books[slot].index_of(rec.cat[slot]));
  return out;
}

// ---------------------------------------------------------------------------
// Taxonomy (exploit name -> metatype)

struct Taxonomy {
  std::map<std::string, std::string> metatype;

  // Exploits missing from the table map to "unlisted" rather than failing.
  std::string metatype_of(const std::string& exploit) const {
    auto it = metatype.find(exploit);
    return it == metatype.end() ? std::string("unlisted") : it->second;
  }
};

// Plain-text format: one "exploit metatype" pair per line, '#' comments.
inline Taxonomy parse_taxonomy(std::istream& in, const std::string& origin = "<taxonomy>") {
  Taxonomy tax;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_first_of(" \t", a);
    if (b == std::string::npos)
      fail(origin + ":" + std::to_string(line_no) + ": expected 'exploit metatype'");
    std::size_t c = line.find_first_not_of(" \t", b);
    std::size_t d = line.find_first_of(" \t", c);
    std::string exploit = line.substr(a, b - a);
    std::string meta = line.substr(c, d == std::string::npos ? std::string::npos : d - c);
    tax.metatype[exploit] = meta;
  }
  return tax;
}

inline Taxonomy load_taxonomy(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open taxonomy file: " + path);
  return parse_taxonomy(in, path);
}

// Built-in copy of the shipped taxonomy table (data/taxonomy.txt); the two
// are kept in sync by a test.
inline Taxonomy default_taxonomy() {
  Taxonomy tax;
  static constexpr std::pair<const char*, const char*> kEntries[] = {
      {"normal", "Normal"},
      // DoS
      {"back", "DoS"},
      {"land", "DoS"},
      {"neptune", "DoS"},
      {"pod", "DoS"},
      {"smurf", "DoS"},
      {"teardrop", "DoS"},
      {"apache2", "DoS"},
      {"mailbomb", "DoS"},
      {"processtable", "DoS"},
      {"udpstorm", "DoS"},
      // Probe
      {"ipsweep", "Probe"},
      {"nmap", "Probe"},
      {"portsweep", "Probe"},
      {"satan", "Probe"},
      {"mscan", "Probe"},
      {"saint", "Probe"},
      // R2L
      {"ftp_write", "R2L"},
      {"guess_passwd", "R2L"},
      {"imap", "R2L"},
      {"multihop", "R2L"},
      {"phf", "R2L"},
      {"spy", "R2L"},
      {"warezclient", "R2L"},
      {"warezmaster", "R2L"},
      {"sendmail", "R2L"},
      {"named", "R2L"},
      {"snmpgetattack", "R2L"},
      {"snmpguess", "R2L"},
      {"worm", "R2L"},
      {"xlock", "R2L"},
      {"xsnoop", "R2L"},
      // U2R
      {"buffer_overflow", "U2R"},
      {"loadmodule", "U2R"},
      {"perl", "U2R"},
      {"rootkit", "U2R"},
      {"httptunnel", "U2R"},
      {"ps", "U2R"},
      {"sqlattack", "U2R"},
      {"xterm", "U2R"},
  };
  for (auto [exploit, meta] : kEntries) tax.metatype[exploit] = meta;
  return tax;
}

// ---------------------------------------------------------------------------
// Label space

// Known classes come from the post-filter training set, ordered
// lexicographically so class indices are stable across runs and platforms.
// Unknown classes are the test labels never seen in training.
struct LabelSpace {
  std::vector<std::string> known_classes;    // sorted; index == class id
  std::vector<std::string> unknown_classes;  // sorted
  std::map<std::string, std::string> metatype_map;

  std::optional<std::size_t> class_index(std::string_view label) const {
    auto it = std::lower_bound(known_classes.begin(), known_classes.end(), label);
    if (it != known_classes.end() && *it == label)
      return static_cast<std::size_t>(it - known_classes.begin());
    return std::nullopt;
  }

  bool is_unknown(std::string_view label) const {
    return std::binary_search(unknown_classes.begin(), unknown_classes.end(), label);
  }
};

inline LabelSpace build_label_space(std::span<const std::string> train_labels,
                                    std::span<const std::string> test_labels,
                                    const Taxonomy& taxonomy) {
  check(!train_labels.empty(), "build_label_space: empty training label set");
  std::set<std::string> train_set(train_labels.begin(), train_labels.end());
  std::set<std::string> test_set(test_labels.begin(), test_labels.end());

  LabelSpace space;
  space.known_classes.assign(train_set.begin(), train_set.end());
  for (const std::string& label : test_set)
    if (!train_set.count(label)) space.unknown_classes.push_back(label);
  for (const std::string& label : train_set)
    space.metatype_map[label] = taxonomy.metatype_of(label);
  for (const std::string& label : test_set)
    space.metatype_map[label] = taxonomy.metatype_of(label);
  return space;
}

}  // namespace osir
