#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "osir/error.hpp"
#include "osir/schema.hpp"
#include "osir/text.hpp"

namespace osir {

// One labeled connection vector. Numeric and 0/1 attributes live in `num`
// (token slots stay zero); the three token attributes live in `cat`.
struct ConnectionRecord {
  std::array<double, kNumAttributes> num{};
  std::array<std::string, 3> cat;
  std::string label;

  const std::string& token(std::size_t attr) const { return cat[categorical_slot(attr)]; }

  friend bool operator==(const ConnectionRecord&, const ConnectionRecord&) = default;
};

namespace detail {

inline std::string line_context(std::size_t line_no) {
  return line_no == 0 ? std::string{} : " at line " + std::to_string(line_no);
}

// Canonical numeric formatting: integers without a point, everything else
// with the shortest digit string that round-trips.
inline void append_number(std::string& out, double v) {
  double r = std::floor(v);
  if (r == v && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    out += buf;
  } else {
    out += format_double(v);
  }
}

}  // namespace detail

// Parses one KDD-format row: 41 comma-separated attributes plus a label,
// with an optional trailing period after the label. line_no (1-based) is
// used only for error messages; pass 0 when unknown.
inline ConnectionRecord parse_kdd_line(std::string_view line, std::size_t line_no = 0) {
  // Strip a trailing CR so CRLF files parse the same as LF files.
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  ConnectionRecord rec;
  std::size_t field = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    std::string_view tok = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);

    if (field < kNumAttributes) {
      const AttrInfo& info = kAttributes[field];
      if (info.kind == AttrKind::categorical) {
        if (tok.empty())
          fail("parse error" + detail::line_context(line_no) + ": empty token for attribute '" +
               std::string(info.name) + "'");
        rec.cat[categorical_slot(field)] = std::string(tok);
      } else {
        double v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
          fail("parse error" + detail::line_context(line_no) + ": non-numeric value '" + std::string(tok) +
               "' for attribute '" + std::string(info.name) + "'");
        if (info.kind == AttrKind::binary && v != 0.0 && v != 1.0)
          fail("parse error" + detail::line_context(line_no) + ": attribute '" + std::string(info.name) +
               "' must be 0 or 1, got '" + std::string(tok) + "'");
        rec.num[field] = v;
      }
    } else if (field == kNumAttributes) {
      if (!tok.empty() && tok.back() == '.') tok.remove_suffix(1);
      if (tok.empty())
        fail("parse error" + detail::line_context(line_no) + ": empty label");
      rec.label = std::string(tok);
    }
    ++field;

    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }

  if (field != kNumAttributes + 1)
    fail("parse error" + detail::line_context(line_no) + ": expected " +
         std::to_string(kNumAttributes + 1) + " fields, got " + std::to_string(field));
  return rec;
}

// Re-serializes a record in KDD text form (canonical numeric formatting,
// no trailing period).
inline std::string to_kdd_line(const ConnectionRecord& rec) {
  std::string out;
  out.reserve(192);
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    if (a != 0) out += ',';
    if (kAttributes[a].kind == AttrKind::categorical)
      out += rec.cat[categorical_slot(a)];
    else
      detail::append_number(out, rec.num[a]);
  }
  out += ',';
  out += rec.label;
  return out;
}

// Canonical duplicate key: exact equality on all 41 attributes and the
// label. Serialized text is canonical, so string equality is value equality.
inline std::string duplicate_key(const ConnectionRecord& rec) { return to_kdd_line(rec); }

}  // namespace osir
