#pragma once

// Plain-text carriers: per-streamline assignments (tck2connectome
// -out_assignments style), per-streamline class files, and integer matrices
// as CSV.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/matrix.hpp"

namespace tractconn::io {

namespace detail {

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++number);
    pos = end + 1;
  }
}

inline bool skippable(std::string_view line) {
  const auto first = line.find_first_not_of(" \t");
  return first == std::string_view::npos || line[first] == '#';
}

template <class Int>
Int parse_int(std::string_view token, std::size_t line_no) {
  Int value{};
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || token.empty())
    fail(Errc::ParseError, "line " + std::to_string(line_no) + ": invalid integer '" + std::string(token) + "'");
  return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while ((pos = line.find_first_not_of(" \t", pos)) != std::string_view::npos) {
    auto end = line.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = line.size();
    tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

inline std::vector<std::string_view> split_on(std::string_view line, char separator) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  for (;;) {
    const auto end = line.find(separator, pos);
    tokens.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return tokens;
}

}  // namespace detail

using AssignmentList = std::vector<NodePair>;

/// One "a b" pair per streamline. Blank lines and '#' comments are skipped.
inline AssignmentList read_assignments(std::string_view text, std::size_t n_streamlines, std::uint32_t n_regions) {
  AssignmentList pairs;
  pairs.reserve(n_streamlines);
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (detail::skippable(line)) return;
    const auto tokens = detail::split_ws(line);
    if (tokens.size() != 2)
      fail(Errc::ParseError, "line " + std::to_string(no) + ": expected two node indices");
    const auto a = detail::parse_int<std::uint32_t>(tokens[0], no);
    const auto b = detail::parse_int<std::uint32_t>(tokens[1], no);
    if (a > n_regions || b > n_regions)
      fail(Errc::NodeOutOfRange, "line " + std::to_string(no) + ": node index exceeds " + std::to_string(n_regions));
    pairs.push_back({a, b});
  });
  if (pairs.size() != n_streamlines)
    fail(Errc::LineCountMismatch,
         std::to_string(pairs.size()) + " assignments for " + std::to_string(n_streamlines) + " streamlines");
  return pairs;
}

/// Counts data lines without validating them; used when the streamline count
/// is not known from a tractogram.
inline std::size_t count_data_lines(std::string_view text) {
  std::size_t n = 0;
  detail::for_each_line(text, [&](std::string_view line, std::size_t) { n += detail::skippable(line) ? 0 : 1; });
  return n;
}

inline std::string write_assignments(const AssignmentList& pairs) {
  std::string out;
  out.reserve(pairs.size() * 8);
  for (const auto& p : pairs) {
    out += std::to_string(p.a);
    out += ' ';
    out += std::to_string(p.b);
    out += '\n';
  }
  return out;
}

/// One class label per line.
inline std::vector<ClassId> read_classes(std::string_view text, std::uint64_t n_classes) {
  std::vector<ClassId> labels;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (detail::skippable(line)) return;
    const auto tokens = detail::split_ws(line);
    if (tokens.size() != 1) fail(Errc::ParseError, "line " + std::to_string(no) + ": expected one class label");
    const auto c = detail::parse_int<ClassId>(tokens[0], no);
    if (c >= n_classes) fail(Errc::ClassOutOfRange, "line " + std::to_string(no) + ": class " + std::to_string(c));
    labels.push_back(c);
  });
  return labels;
}

inline std::string write_classes(const std::vector<ClassId>& labels) {
  std::string out;
  out.reserve(labels.size() * 5);
  for (auto c : labels) {
    out += std::to_string(c);
    out += '\n';
  }
  return out;
}

template <class Int>
std::string write_matrix_csv(const Matrix<Int>& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += std::to_string(m(i, j));
    }
    out += '\n';
  }
  return out;
}

/// Reads a square integer matrix. Counts must be nonnegative and symmetric
/// unless `signed_values` is set (difference maps).
inline CountMatrix read_matrix_csv(std::string_view text, bool signed_values = false) {
  std::vector<std::vector<std::int64_t>> rows;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (detail::skippable(line)) return;
    std::vector<std::int64_t> row;
    for (auto token : detail::split_on(line, ',')) {
      const auto first = token.find_first_not_of(" \t");
      const auto last = token.find_last_not_of(" \t");
      token = first == std::string_view::npos ? std::string_view{} : token.substr(first, last - first + 1);
      const auto v = detail::parse_int<std::int64_t>(token, no);
      if (!signed_values && v < 0) fail(Errc::NegativeEntry, "line " + std::to_string(no) + ": negative count");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  });
  const std::size_t n = rows.size();
  for (const auto& row : rows)
    if (row.size() != n)
      fail(Errc::NotSquare, std::to_string(n) + " rows but a row has " + std::to_string(row.size()) + " columns");
  CountMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  if (!m.is_symmetric()) fail(Errc::NotSymmetric, "matrix is not symmetric");
  return m;
}

}  // namespace tractconn::io
