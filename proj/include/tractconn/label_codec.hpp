#pragma once

// Unordered region pair <-> streamline class label.
//
// Regions are numbered 1..n and 0 means "unassigned". Class 0 is the unknown
// class; canonical pairs (a <= b) are ranked lexicographically starting at 1:
//   (1,1) (1,2) ... (1,n) (2,2) ... (n,n)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tractconn/error.hpp"

namespace tractconn {

using ClassId = std::uint32_t;
using RegionId = std::uint32_t;

struct ParcellationScheme {
  std::uint32_t n_regions = 0;
  std::string name;
  std::vector<std::string> region_names;  // empty or exactly n_regions entries

  void validate() const {
    require(n_regions >= 1, Errc::ConfigInvalid, "scheme needs at least one region");
    require(region_names.empty() || region_names.size() == n_regions, Errc::ConfigInvalid,
            "scheme '" + name + "' region name count does not match n_regions");
  }
};

struct NodePair {
  RegionId a = 0;
  RegionId b = 0;

  NodePair canonical() const noexcept { return a <= b ? *this : NodePair{b, a}; }
  bool unassigned() const noexcept { return a == 0 || b == 0; }

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

constexpr std::uint64_t num_classes(std::uint64_t n_regions) noexcept {
  return n_regions * (n_regions + 1) / 2 + 1;
}

inline std::uint64_t num_classes(const ParcellationScheme& scheme) { return num_classes(scheme.n_regions); }

namespace detail {

// Number of canonical pairs whose first element is < a (rows 1..a-1).
constexpr std::uint64_t row_start(std::uint64_t a, std::uint64_t n) noexcept {
  return (a - 1) * (2 * n - a + 2) / 2;
}

}  // namespace detail

inline ClassId encode(NodePair pair, std::uint32_t n_regions) {
  if (pair.a > n_regions || pair.b > n_regions)
    fail(Errc::NodeOutOfRange, "node pair (" + std::to_string(pair.a) + "," + std::to_string(pair.b) +
                                   ") outside 0.." + std::to_string(n_regions));
  if (pair.unassigned()) return 0;
  const auto p = pair.canonical();
  return static_cast<ClassId>(detail::row_start(p.a, n_regions) + (p.b - p.a) + 1);
}

inline NodePair decode(ClassId label, std::uint32_t n_regions) {
  const std::uint64_t n = n_regions;
  if (label >= num_classes(n))
    fail(Errc::ClassOutOfRange, "class " + std::to_string(label) + " >= " + std::to_string(num_classes(n)));
  if (label == 0) return {0, 0};
  const std::uint64_t rank = label - 1;
  // Largest k = a-1 with k(2n+1-k)/2 <= rank; start from the real root and fix up.
  const double m = 2.0 * static_cast<double>(n) + 1.0;
  const double root = (m - std::sqrt(m * m - 8.0 * static_cast<double>(rank))) / 2.0;
  auto k = static_cast<std::uint64_t>(std::max(0.0, std::floor(root)));
  while (k > 0 && detail::row_start(k + 1, n) > rank) --k;
  while (k + 1 < n && detail::row_start(k + 2, n) <= rank) ++k;
  const std::uint64_t a = k + 1;
  const std::uint64_t b = a + (rank - detail::row_start(a, n));
  return {static_cast<RegionId>(a), static_cast<RegionId>(b)};
}

inline ClassId encode(NodePair pair, const ParcellationScheme& scheme) { return encode(pair, scheme.n_regions); }
inline NodePair decode(ClassId label, const ParcellationScheme& scheme) { return decode(label, scheme.n_regions); }

// Scheme definition file: first line n_regions, then optional region names,
// one per line.

inline ParcellationScheme parse_scheme(std::string_view text, std::string name = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  ParcellationScheme scheme;
  scheme.name = std::move(name);
  bool have_count = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_count) {
      if (line.empty()) continue;
      std::size_t used = 0;
      long long n = 0;
      try {
        n = std::stoll(line, &used);
      } catch (const std::exception&) {
        fail(Errc::ParseError, "scheme file must start with the region count");
      }
      if (used != line.size() || n < 1 || n > 1000000)
        fail(Errc::ParseError, "invalid region count '" + line + "'");
      scheme.n_regions = static_cast<std::uint32_t>(n);
      have_count = true;
      continue;
    }
    if (line.empty()) continue;
    scheme.region_names.push_back(line);
  }
  if (!have_count) fail(Errc::ParseError, "empty scheme file");
  scheme.validate();
  return scheme;
}

inline std::string format_scheme(const ParcellationScheme& scheme) {
  std::string out = std::to_string(scheme.n_regions) + "\n";
  for (const auto& name : scheme.region_names) out += name + "\n";
  return out;
}

}  // namespace tractconn
