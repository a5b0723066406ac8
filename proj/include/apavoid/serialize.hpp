#pragma once

// JSON encodings and point-set file loading.
//
// Rationals travel as "p/q" strings, reals as decimal strings, points as arrays
// of rationals. Table payloads ({"columns": [...], "rows": [[...]]}) may also
// carry plain JSON numbers.

#include <cctype>
#include <cstddef>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "apavoid/errors.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"
#include "apavoid/real.hpp"

namespace apavoid {

using json = nlohmann::json;

inline json rational_json(const Rational& r) { return to_string(r); }

/// Accepts "p/q", decimal strings and JSON integers. JSON floats go through their
/// shortest decimal text, which converts exactly.
inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(BigInt(j.dump()));
  if (j.is_number_float()) return parse_rational(j.dump());
  throw parse_error("expected a rational, got " + std::string(j.type_name()));
}

inline json real_json(const Real& x) { return format_real(x, 25); }

inline json point_json(const PointD& p) {
  json out = json::array();
  for (const auto& c : p) out.push_back(rational_json(c));
  return out;
}

inline json points_json(std::span<const Rational> pts) {
  json out = json::array();
  for (const auto& c : pts) out.push_back(rational_json(c));
  return out;
}

inline json points_json(std::span<const PointD> pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_json(p));
  return out;
}

inline json interval_json(const ClosedInterval& iv) { return json::array({rational_json(iv.left), rational_json(iv.right)}); }

enum class PointFormat { json, plain };

/// Rows in file order; every row has the same length.
struct PointRows {
  std::size_t dimension = 0;
  std::vector<PointD> rows;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void add_row(PointRows& out, PointD row) {
  if (out.rows.empty()) out.dimension = row.size();
  if (row.size() != out.dimension)
    throw domain_error("row " + std::to_string(out.rows.size() + 1) + " has dimension " + std::to_string(row.size()) +
                       ", expected " + std::to_string(out.dimension));
  out.rows.push_back(std::move(row));
}

inline PointRows parse_plain(std::string_view text) {
  PointRows out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    PointD row;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ',' || std::isspace(static_cast<unsigned char>(line[i])))) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ',' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      try {
        row.push_back(parse_rational(line.substr(start, i - start)));
      } catch (const parse_error& e) {
        throw parse_error(e.what(), line_no, start + 1);
      }
    }
    if (!row.empty()) add_row(out, std::move(row));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

inline PointRows parse_json_points(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw parse_error("malformed JSON", line, col);
  }
  if (!doc.is_array()) throw parse_error("point file must hold a JSON array", 1, 1);
  PointRows out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    try {
      PointD row;
      if (item.is_array()) {
        for (const auto& c : item) row.push_back(rational_from_json(c));
      } else {
        row.push_back(rational_from_json(item));
      }
      add_row(out, std::move(row));
    } catch (const parse_error& e) {
      throw parse_error(std::string(e.what()) + " in element " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace detail

inline PointRows parse_point_rows(std::string_view text, PointFormat format) {
  return format == PointFormat::json ? detail::parse_json_points(text) : detail::parse_plain(text);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline PointRows load_point_rows(const std::string& path, PointFormat format) {
  return parse_point_rows(read_file(path), format);
}

inline std::variant<PointSet1D, PointSetD> to_point_set(const PointRows& rows) {
  if (rows.rows.empty()) throw domain_error("point file holds no points");
  if (rows.dimension == 1) {
    std::vector<Rational> pts;
    for (const auto& r : rows.rows) pts.push_back(r[0]);
    return PointSet1D(std::move(pts));
  }
  return PointSetD(rows.dimension, rows.rows);
}

/// Plain files hold one point per line (coordinates split by commas or blanks,
/// '#' starts a comment); JSON files hold an array of numbers or of arrays.
inline std::variant<PointSet1D, PointSetD> load_pointset(const std::string& path, PointFormat format) {
  return to_point_set(load_point_rows(path, format));
}

}  // namespace apavoid
