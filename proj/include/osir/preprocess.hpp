#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "osir/error.hpp"
#include "osir/matrix.hpp"
#include "osir/random.hpp"
#include "osir/record.hpp"

namespace osir {

// ---------------------------------------------------------------------------
// Class-balance filters

struct DownsampledClass {
  std::string label;
  std::size_t before = 0;
  std::size_t after = 0;
};

struct DownsampleResult {
  std::vector<ConnectionRecord> records;
  std::vector<DownsampledClass> classes;  // the two classes that were cut
};

namespace detail {

inline std::map<std::string, std::size_t> class_counts(std::span<const ConnectionRecord> records) {
  std::map<std::string, std::size_t> counts;
  for (const ConnectionRecord& rec : records) ++counts[rec.label];
  return counts;
}

}  // namespace detail

// Cuts the two most frequent classes to ceil(n/factor) records each via
// seeded uniform sampling without replacement; every other class passes
// through untouched. Survivors keep their original relative order.
inline DownsampleResult downsample_dominant(std::span<const ConnectionRecord> records,
                                            std::uint64_t factor, std::uint64_t seed) {
  check(factor >= 1, "downsample_dominant: factor must be >= 1");
  auto counts = detail::class_counts(records);
  check(counts.size() >= 2, "downsample_dominant: need at least two classes, got " +
                                std::to_string(counts.size()));

  // Two most frequent classes; ties broken by lexicographically smaller name
  // (map order), so selection is deterministic.
  std::vector<std::pair<std::string, std::size_t>> by_count(counts.begin(), counts.end());
  std::stable_sort(by_count.begin(), by_count.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  DownsampleResult result;
  if (factor == 1) {
    result.records.assign(records.begin(), records.end());
    for (std::size_t c = 0; c < 2; ++c)
      result.classes.push_back({by_count[c].first, by_count[c].second, by_count[c].second});
    return result;
  }

  Rng rng(seed);
  std::vector<bool> keep(records.size(), true);
  for (std::size_t c = 0; c < 2; ++c) {
    const std::string& label = by_count[c].first;
    std::size_t n = by_count[c].second;
    std::size_t target = static_cast<std::size_t>((n + factor - 1) / factor);  // ceil(n/factor)

    // Canonically ordered index list for this class, then a seeded draw.
    std::vector<std::size_t> members;
    members.reserve(n);
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].label == label) members.push_back(i);
    std::vector<std::size_t> chosen = sample_without_replacement(members.size(), target, rng);

    for (std::size_t i = 0; i < members.size(); ++i) keep[members[i]] = false;
    for (std::size_t pick : chosen) keep[members[pick]] = true;
    result.classes.push_back({label, n, target});
  }

  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep[i]) result.records.push_back(records[i]);
  return result;
}

struct DropRareResult {
  std::vector<ConnectionRecord> records;
  std::vector<std::pair<std::string, std::size_t>> removed;  // label, count
};

// Removes every training class with fewer than min_count records. Their
// labels later land in unknown_classes via build_label_space.
inline DropRareResult drop_rare_classes(std::span<const ConnectionRecord> records,
                                        std::size_t min_count) {
  auto counts = detail::class_counts(records);
  DropRareResult result;
  for (const auto& [label, count] : counts)
    if (count < min_count) result.removed.push_back({label, count});
  for (const ConnectionRecord& rec : records)
    if (counts[rec.label] >= min_count) result.records.push_back(rec);
  check(!result.records.empty(), "drop_rare_classes: no records left (min_count=" +
                                     std::to_string(min_count) + ")");
  return result;
}

// ---------------------------------------------------------------------------
// Min-max scaling

struct ScalingParams {
  std::array<double, kNumAttributes> min{};
  std::array<double, kNumAttributes> max{};
};

inline ScalingParams fit_scaler(std::span<const std::array<double, kNumAttributes>> encoded) {
  check(!encoded.empty(), "fit_scaler: empty corpus");
  ScalingParams params;
  params.min = encoded.front();
  params.max = encoded.front();
  for (const auto& row : encoded)
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      params.min[a] = std::min(params.min[a], row[a]);
      params.max[a] = std::max(params.max[a], row[a]);
    }
  return params;
}

// v' = (v - min) / (max - min), clamped to [0,1]; constant columns map to 0.
inline std::array<double, kNumAttributes> apply_scaler(
    const std::array<double, kNumAttributes>& v, const ScalingParams& params) {
  std::array<double, kNumAttributes> out{};
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    double range = params.max[a] - params.min[a];
    if (range <= 0) {
      out[a] = 0.0;
    } else {
      double s = (v[a] - params.min[a]) / range;
      out[a] = std::clamp(s, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace osir
