#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/io/tck.hpp"

namespace tractconn::geometry {

inline constexpr std::size_t kDefaultPoints = 15;

/// Exactly P points, evenly spaced in arc length along the source polyline.
struct FixedStreamline {
  std::vector<Vec3> points;

  friend bool operator==(const FixedStreamline&, const FixedStreamline&) = default;
};

/// Axis-aligned box mapped onto [-1, 1]^3 by `normalize`.
struct Bounds {
  Vec3 lo{};
  Vec3 hi{};

  /// MNI152 brain bounding box, millimetres.
  static constexpr Bounds mni152() { return {{-90.0, -126.0, -72.0}, {90.0, 90.0, 108.0}}; }

  void validate() const {
    for (int k = 0; k < 3; ++k)
      if (!(hi[k] > lo[k]) || !std::isfinite(hi[k] - lo[k]))
        fail(Errc::ZeroExtentBounds, "bounds must have positive finite extent on every axis");
  }

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double arc_length(std::span<const Vec3> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) length += distance(points[i - 1], points[i]);
  return length;
}

/// Linear-interpolation resampling at arc lengths k*L/(P-1). The first and
/// last output points are copied from the input endpoints.
inline FixedStreamline resample(std::span<const Vec3> points, std::size_t n_points = kDefaultPoints) {
  require(n_points >= 2, Errc::InvalidArgument, "resample needs at least 2 output points");
  require(points.size() >= 2, Errc::ShortStreamline, "streamline has fewer than 2 points");

  std::vector<double> cumulative(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    cumulative[i] = cumulative[i - 1] + distance(points[i - 1], points[i]);
  const double total = cumulative.back();
  if (!(total > 0.0)) fail(Errc::DegenerateStreamline, "streamline has zero length");

  FixedStreamline out;
  out.points.resize(n_points);
  out.points.front() = points.front();
  out.points.back() = points.back();
  std::size_t segment = 1;
  for (std::size_t k = 1; k + 1 < n_points; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n_points - 1);
    while (segment + 1 < points.size() && cumulative[segment] < target) ++segment;
    const double seg_len = cumulative[segment] - cumulative[segment - 1];
    const double t = seg_len > 0.0 ? std::clamp((target - cumulative[segment - 1]) / seg_len, 0.0, 1.0) : 0.0;
    const auto& a = points[segment - 1];
    const auto& b = points[segment];
    out.points[k] = {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
  }
  return out;
}

inline FixedStreamline resample(const Streamline& s, std::size_t n_points = kDefaultPoints) {
  return resample(std::span<const Vec3>(s.points), n_points);
}

inline Vec3 normalize_point(const Vec3& p, const Bounds& bounds) {
  Vec3 out{};
  for (int k = 0; k < 3; ++k) out[k] = 2.0 * (p[k] - bounds.lo[k]) / (bounds.hi[k] - bounds.lo[k]) - 1.0;
  return out;
}

inline FixedStreamline normalize(FixedStreamline s, const Bounds& bounds) {
  bounds.validate();
  for (auto& p : s.points) p = normalize_point(p, bounds);
  return s;
}

inline FixedStreamline maybe_flip(FixedStreamline s, bool heads) {
  if (heads) std::reverse(s.points.begin(), s.points.end());
  return s;
}

/// Resamples and normalizes one streamline straight into `out` (P*3 values,
/// point-major). Throws DegenerateStreamline for zero-length input.
template <class T>
void encode_input(const Streamline& s, std::size_t n_points, const Bounds& bounds, std::span<T> out) {
  const auto fixed = resample(s, n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const auto q = normalize_point(fixed.points[i], bounds);
    for (int k = 0; k < 3; ++k) out[3 * i + static_cast<std::size_t>(k)] = static_cast<T>(q[k]);
  }
}

inline bool is_degenerate(const Streamline& s) {
  return s.points.size() < 2 || !(arc_length(s.points) > 0.0);
}

}  // namespace tractconn::geometry
