#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/matrix.hpp"

namespace tractconn {

/// Streamline-count connectome. Region r occupies row/column r-1. Off-diagonal
/// counts are mirrored, so the upper triangle (with diagonal) plus
/// unknown_count equals the number of streamlines.
struct Connectome {
  std::uint32_t n_regions = 0;
  CountMatrix counts;
  std::int64_t unknown_count = 0;

  explicit Connectome(std::uint32_t n = 0) : n_regions(n), counts(CountMatrix::square(n)) {}

  void add(ClassId label, std::int64_t times = 1) {
    const auto pair = decode(label, n_regions);
    if (pair.unassigned()) {
      unknown_count += times;
      return;
    }
    const std::size_t a = pair.a - 1;
    const std::size_t b = pair.b - 1;
    counts(a, b) += times;
    if (a != b) counts(b, a) += times;
  }

  std::int64_t upper_sum() const {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n_regions; ++i)
      for (std::size_t j = i; j < n_regions; ++j) total += counts(i, j);
    return total;
  }

  std::int64_t streamline_count() const { return upper_sum() + unknown_count; }

  /// Shard merge; associative and commutative.
  Connectome& operator+=(const Connectome& other) {
    require(other.n_regions == n_regions, Errc::SchemeMismatch, "cannot merge connectomes of different schemes");
    for (std::size_t i = 0; i < counts.size(); ++i) counts.data()[i] += other.counts.data()[i];
    unknown_count += other.unknown_count;
    return *this;
  }

  friend bool operator==(const Connectome&, const Connectome&) = default;
};

inline Connectome assemble(std::span<const ClassId> classes, const ParcellationScheme& scheme) {
  scheme.validate();
  Connectome c(scheme.n_regions);
  for (auto label : classes) c.add(label);
  return c;
}

inline Connectome assemble_from_assignments(std::span<const NodePair> pairs, const ParcellationScheme& scheme) {
  scheme.validate();
  Connectome c(scheme.n_regions);
  for (const auto& p : pairs) c.add(encode(p, scheme));
  return c;
}

/// traditional - predicted, entrywise.
inline CountMatrix difference_map(const Connectome& traditional, const Connectome& predicted) {
  require(traditional.n_regions == predicted.n_regions, Errc::SchemeMismatch,
          "difference map needs connectomes of the same scheme");
  CountMatrix diff(traditional.n_regions, traditional.n_regions);
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff.data()[i] = traditional.counts.data()[i] - predicted.counts.data()[i];
  return diff;
}

/// Wraps a count matrix read from CSV. The unknown count is not stored in
/// CSV and comes back as 0.
inline Connectome connectome_from_matrix(const CountMatrix& m) {
  require(m.is_square(), Errc::NotSquare, "connectome matrix must be square");
  require(m.is_symmetric(), Errc::NotSymmetric, "connectome matrix must be symmetric");
  Connectome c(static_cast<std::uint32_t>(m.rows()));
  c.counts = m;
  return c;
}

}  // namespace tractconn
