#pragma once

// Synthetic subjects: regions on a sphere, nested coarse/fine parcellations,
// and noisy Bezier streamlines between region pairs drawn from a
// subject-specific preference matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tractconn/connectome.hpp"
#include "tractconn/error.hpp"
#include "tractconn/geometry.hpp"
#include "tractconn/io/bytes.hpp"
#include "tractconn/io/manifest.hpp"
#include "tractconn/io/tck.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/random.hpp"

namespace tractconn::synth {

struct SynthConfig {
  std::uint32_t n_coarse = 10;
  std::uint32_t split_factor = 2;
  std::size_t n_streamlines = 50000;
  double noise_sigma = 2.0;        // mm
  double curvature = 20.0;         // mm, scale of the mid control point offset
  double unknown_fraction = 0.02;
  std::size_t n_subjects = 20;
  std::uint64_t rng_seed = 0;

  double sphere_radius = 70.0;     // mm
  double fine_offset = 12.0;       // mm, sub-centroid distance from the coarse centroid
  double region_radius = 5.0;      // mm, endpoint jitter never leaves this ball
  double preference_length = 50.0; // mm, decay length of the base pair weight
  double preference_concentration = 5.0;
  double point_spacing = 4.0;      // mm
  std::size_t min_points = 20;
  double train_fraction = 0.7;
  double val_fraction = 0.1;

  std::uint32_t n_fine() const { return n_coarse * split_factor; }

  void validate() const {
    require(n_coarse >= 1 && split_factor >= 1, Errc::ConfigInvalid, "region counts must be >= 1");
    require(n_fine() >= 2, Errc::ConfigInvalid, "at least two fine regions are required");
    require(n_streamlines >= 1 && n_subjects >= 1, Errc::ConfigInvalid, "streamline and subject counts must be >= 1");
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), Errc::ConfigInvalid, "noise_sigma must be >= 0");
    require(curvature >= 0.0 && std::isfinite(curvature), Errc::ConfigInvalid, "curvature must be >= 0");
    require(unknown_fraction >= 0.0 && unknown_fraction <= 1.0, Errc::ConfigInvalid, "unknown_fraction must be in [0,1]");
    require(sphere_radius > 0.0 && region_radius > 0.0 && fine_offset >= 0.0, Errc::ConfigInvalid,
            "geometry lengths must be positive");
    require(preference_length > 0.0 && preference_concentration > 0.0, Errc::ConfigInvalid,
            "preference parameters must be positive");
    require(point_spacing > 0.0 && min_points >= 2, Errc::ConfigInvalid, "sampling parameters invalid");
    require(train_fraction >= 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction <= 1.0,
            Errc::ConfigInvalid, "split fractions must be in [0,1] and sum to at most 1");
  }
};

/// Fine region f (1-based) belongs to coarse region (f-1)/s + 1.
constexpr RegionId parent_region(RegionId fine, std::uint32_t split_factor) noexcept {
  return fine == 0 ? 0 : (fine - 1) / split_factor + 1;
}

constexpr RegionId fine_region(RegionId coarse, std::uint32_t k, std::uint32_t split_factor) noexcept {
  return (coarse - 1) * split_factor + k + 1;
}

namespace detail {

inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 gaussian3(Rng& rng, double sigma) {
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return {sigma * x, sigma * y, sigma * z};
}

// Gaussian jitter conditioned on staying inside the region ball.
inline Vec3 endpoint_jitter(Rng& rng, double sigma, double radius) {
  if (sigma == 0.0) return {0.0, 0.0, 0.0};
  for (;;) {
    const auto v = gaussian3(rng, sigma);
    if (norm(v) <= radius) return v;
  }
}

inline Vec3 bezier(const Vec3& p0, const Vec3& p1, const Vec3& p2, double t) {
  const double u = 1.0 - t;
  return add(add(scale(p0, u * u), scale(p1, 2.0 * u * t)), scale(p2, t * t));
}

}  // namespace detail

struct RegionLayout {
  std::vector<Vec3> coarse;  // index r-1 for region r
  std::vector<Vec3> fine;
};

/// Coarse centroids on a Fibonacci sphere; fine centroids spread around each
/// coarse centroid in its tangent plane and projected back onto the sphere.
inline RegionLayout region_layout(const SynthConfig& config) {
  config.validate();
  RegionLayout layout;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double n = static_cast<double>(config.n_coarse);
  for (std::uint32_t i = 0; i < config.n_coarse; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double phi = golden * static_cast<double>(i);
    layout.coarse.push_back(detail::scale({r * std::cos(phi), y, r * std::sin(phi)}, config.sphere_radius));
  }
  for (const auto& c : layout.coarse) {
    const Vec3 normal = detail::scale(c, 1.0 / detail::norm(c));
    const Vec3 axis = std::abs(normal[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 u = detail::cross(normal, axis);
    u = detail::scale(u, 1.0 / detail::norm(u));
    const Vec3 v = detail::cross(normal, u);
    for (std::uint32_t k = 0; k < config.split_factor; ++k) {
      if (config.split_factor == 1) {
        layout.fine.push_back(c);
        continue;
      }
      const double angle = 2.0 * std::numbers::pi * k / config.split_factor;
      const Vec3 offset = detail::add(detail::scale(u, std::cos(angle)), detail::scale(v, std::sin(angle)));
      const Vec3 p = detail::add(c, detail::scale(offset, config.fine_offset));
      layout.fine.push_back(detail::scale(p, config.sphere_radius / detail::norm(p)));
    }
  }
  return layout;
}

inline std::uint64_t subject_seed(const SynthConfig& config, std::size_t subject_index) {
  return mix_seed(config.rng_seed, subject_index);
}

/// Unnormalized weights over unordered fine pairs (a < b): exp(-d/lambda)
/// times a per-subject Gamma(k)/k factor. Same-region pairs get weight 0.
inline Matrix<double> subject_preferences(const SynthConfig& config, const RegionLayout& layout,
                                          std::uint64_t seed) {
  const std::uint32_t n = config.n_fine();
  Matrix<double> w(n, n, 0.0);
  Rng rng(mix_seed(seed, 0x9EF));
  const double k = config.preference_concentration;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b) {
      const double base = std::exp(-geometry::distance(layout.fine[a], layout.fine[b]) / config.preference_length);
      w(a, b) = w(b, a) = base * rng.gamma(k) / k;
    }
  return w;
}

struct SyntheticSubject {
  Tractogram tracks;
  io::AssignmentList coarse;
  io::AssignmentList fine;
};

inline ParcellationScheme coarse_scheme(const SynthConfig& c) { return {c.n_coarse, "coarse", {}}; }
inline ParcellationScheme fine_scheme(const SynthConfig& c) { return {c.n_fine(), "fine", {}}; }

/// Session 2 keeps the subject's preferences and redraws everything else.
inline SyntheticSubject generate_subject(const SynthConfig& config, std::uint64_t seed, std::uint32_t session = 1) {
  config.validate();
  const auto layout = region_layout(config);
  const auto prefs = subject_preferences(config, layout, seed);
  const std::uint32_t n = config.n_fine();

  std::vector<std::pair<RegionId, RegionId>> pairs;
  std::vector<double> cumulative;
  double running = 0.0;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b) {
      running += prefs(a, b);
      pairs.emplace_back(a + 1, b + 1);
      cumulative.push_back(running);
    }

  Rng rng(mix_seed(seed, 0x5E55 + session));
  SyntheticSubject out;
  out.tracks.reserve(config.n_streamlines);
  out.coarse.reserve(config.n_streamlines);
  out.fine.reserve(config.n_streamlines);
  for (std::size_t s = 0; s < config.n_streamlines; ++s) {
    const double pick = rng.uniform() * running;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    auto [a, b] = pairs[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), pairs.size() - 1)];
    if (rng.bernoulli(0.5)) std::swap(a, b);

    const Vec3 start = detail::add(layout.fine[a - 1], detail::endpoint_jitter(rng, config.noise_sigma, config.region_radius));
    const Vec3 end = detail::add(layout.fine[b - 1], detail::endpoint_jitter(rng, config.noise_sigma, config.region_radius));
    const Vec3 mid = detail::add(detail::scale(detail::add(start, end), 0.5), detail::gaussian3(rng, config.curvature));

    double arc = 0.0;
    Vec3 prev = start;
    for (int i = 1; i <= 64; ++i) {
      const Vec3 p = detail::bezier(start, mid, end, i / 64.0);
      arc += geometry::distance(prev, p);
      prev = p;
    }
    const auto count = std::max(config.min_points, static_cast<std::size_t>(std::ceil(arc / config.point_spacing)) + 1);

    const bool unknown = rng.bernoulli(config.unknown_fraction);
    const double t_end = unknown ? rng.uniform(0.35, 0.65) : 1.0;

    Streamline line;
    line.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
      if (i == 0) {
        line.points.push_back(start);
      } else if (i + 1 == count && !unknown) {
        line.points.push_back(end);
      } else {
        const Vec3 p = detail::bezier(start, mid, end, t);
        line.points.push_back(config.noise_sigma > 0.0 ? detail::add(p, detail::gaussian3(rng, config.noise_sigma)) : p);
      }
    }
    out.tracks.push_back(std::move(line));
    const RegionId b_label = unknown ? 0 : b;
    out.fine.push_back({a, b_label});
    out.coarse.push_back({parent_region(a, config.split_factor), parent_region(b_label, config.split_factor)});
  }
  return out;
}

inline std::string subject_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sub-%03zu", index);
  return buf;
}

inline std::filesystem::path session_dir(const std::filesystem::path& root, const std::string& subject,
                                         std::uint32_t session) {
  return root / subject / ("ses-" + std::to_string(session));
}

/// Splits are round(test * n) and round(val * n) with the remainder in
/// train; membership is a seeded shuffle of the subject order.
inline io::Manifest cohort_manifest(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.n_subjects;
  const double test_fraction = 1.0 - config.train_fraction - config.val_fraction;
  const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(n)));
  const auto n_val = std::min(n - n_test, static_cast<std::size_t>(std::lround(config.val_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(config.rng_seed, 0x5911));
  rng.shuffle(std::span<std::size_t>(order));
  io::Manifest m;
  m.subjects.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.subjects[i].subject = subject_id(i);
  for (std::size_t rank = 0; rank < n; ++rank) {
    auto& e = m.subjects[order[rank]];
    e.split = rank < n_test ? io::Split::Test : rank < n_test + n_val ? io::Split::Val : io::Split::Train;
  }
  char buf[64];
  auto setting = [&](const char* key, const char* fmt, auto value) {
    std::snprintf(buf, sizeof buf, fmt, value);
    m.settings.emplace_back(key, buf);
  };
  setting("seed", "%llu", static_cast<unsigned long long>(config.rng_seed));
  setting("n_coarse", "%u", config.n_coarse);
  setting("split_factor", "%u", config.split_factor);
  setting("n_streamlines", "%zu", config.n_streamlines);
  setting("noise_sigma", "%.17g", config.noise_sigma);
  setting("curvature", "%.17g", config.curvature);
  setting("unknown_fraction", "%.17g", config.unknown_fraction);
  return m;
}

struct SessionFiles {
  std::string tracks;
  std::string assign_coarse;
  std::string assign_fine;
  std::string connectome_coarse;
  std::string connectome_fine;
};

inline SessionFiles render_subject(const SynthConfig& config, const SyntheticSubject& s) {
  SessionFiles f;
  f.tracks = io::write_tck(s.tracks);
  f.assign_coarse = io::write_assignments(s.coarse);
  f.assign_fine = io::write_assignments(s.fine);
  f.connectome_coarse = io::write_matrix_csv(assemble_from_assignments(s.coarse, coarse_scheme(config)).counts);
  f.connectome_fine = io::write_matrix_csv(assemble_from_assignments(s.fine, fine_scheme(config)).counts);
  return f;
}

inline void write_session(const std::filesystem::path& dir, const SessionFiles& f) {
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "tracks.tck", f.tracks);
  io::write_file_atomic(dir / "assign_coarse.txt", f.assign_coarse);
  io::write_file_atomic(dir / "assign_fine.txt", f.assign_fine);
  io::write_file_atomic(dir / "connectome_coarse.csv", f.connectome_coarse);
  io::write_file_atomic(dir / "connectome_fine.csv", f.connectome_fine);
}

/// Writes <root>/<subject>/ses-<k>/{tracks.tck, assign_*.txt, connectome_*.csv}
/// for sessions 1..sessions, schemes/{coarse,fine}.txt and manifest.txt.
/// The manifest is written last.
inline io::Manifest generate_cohort(const SynthConfig& config, const std::filesystem::path& root,
                                    std::uint32_t sessions = 1, std::size_t threads = 1,
                                    const std::function<void(const std::string&)>& progress = {}) {
  config.validate();
  require(config.n_subjects >= 5, Errc::ConfigInvalid, "a cohort needs at least 5 subjects");
  require(sessions >= 1, Errc::ConfigInvalid, "at least one session is required");
  const auto manifest = cohort_manifest(config);
  std::filesystem::create_directories(root / "schemes");
  io::write_file_atomic(root / "schemes" / "coarse.txt", format_scheme(coarse_scheme(config)));
  io::write_file_atomic(root / "schemes" / "fine.txt", format_scheme(fine_scheme(config)));

  const std::size_t jobs = config.n_subjects * sessions;
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(threads, 1));
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t job = w; job < jobs; job += errors.size()) {
        const std::size_t subject = job / sessions;
        const auto session = static_cast<std::uint32_t>(job % sessions + 1);
        const auto data = generate_subject(config, subject_seed(config, subject), session);
        write_session(session_dir(root, subject_id(subject), session), render_subject(config, data));
        if (progress && w == 0) progress(subject_id(subject) + " ses-" + std::to_string(session));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (errors.size() == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < errors.size(); ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  io::write_file_atomic(root / "manifest.txt", io::write_manifest(manifest));
  return manifest;
}

}  // namespace tractconn::synth
