#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/geometry.hpp"
#include "tractconn/net/model.hpp"

namespace tractconn::net {

/// Immutable 32-bit copy of a trained model; safe to share between threads.
struct InferenceModel {
  Architecture arch;
  geometry::Bounds bounds;
  ForwardWeights<float> weights;

  static InferenceModel from(const ModelParams& params) {
    return {params.arch, params.bounds, ForwardWeights<float>::from(params)};
  }
};

struct PredictOptions {
  std::size_t batch_size = 1024;
  std::size_t threads = 1;
};

/// Per-streamline wall time, measured per batch and divided by batch size.
struct TimingReport {
  std::size_t streamlines = 0;
  std::size_t batches = 0;
  double total_seconds = 0.0;
  double median_us = 0.0;
  double q1_us = 0.0;
  double q3_us = 0.0;
};

struct Prediction {
  std::vector<std::vector<ClassId>> classes;  // per head, one per streamline
  std::size_t degenerate = 0;                 // zero-length inputs, assigned class 0
  TimingReport timing;
};

/// Linear-interpolated quantile of sorted data (q in [0,1]).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Prediction predict(const InferenceModel& model, const Tractogram& tracks, const PredictOptions& options = {}) {
  require(options.batch_size >= 1, Errc::ConfigInvalid, "batch size must be >= 1");
  const std::size_t heads = model.arch.num_heads();
  const std::size_t P = model.arch.input_points;
  const std::size_t n = tracks.size();
  const std::size_t n_batches = (n + options.batch_size - 1) / options.batch_size;
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, std::max<std::size_t>(n_batches, 1)));

  Prediction out;
  out.classes.assign(heads, std::vector<ClassId>(n, 0));
  std::vector<double> per_batch_us(n_batches, 0.0);
  std::vector<std::size_t> degenerate(workers, 0);

  auto run = [&](std::size_t worker) {
    Activations<float> acts;
    std::vector<float> inputs;
    std::vector<std::size_t> valid;
    for (std::size_t b = worker; b < n_batches; b += workers) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t start = b * options.batch_size;
      const std::size_t count = std::min(options.batch_size, n - start);
      inputs.resize(count * P * 3);
      valid.clear();
      for (std::size_t i = 0; i < count; ++i) {
        const auto& s = tracks[start + i];
        if (geometry::is_degenerate(s)) {
          ++degenerate[worker];
          continue;
        }
        geometry::encode_input<float>(s, P, model.bounds,
                                      std::span<float>(inputs).subspan(valid.size() * P * 3, P * 3));
        valid.push_back(start + i);
      }
      if (!valid.empty()) {
        forward<float>(model.weights, std::span<const float>(inputs.data(), valid.size() * P * 3), valid.size(), acts);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t K = model.arch.head_classes[h];
          for (std::size_t i = 0; i < valid.size(); ++i)
            out.classes[h][valid[i]] = static_cast<ClassId>(argmax_row(acts.logits[h].data() + i * K, K));
        }
      }
      const auto t1 = std::chrono::steady_clock::now();
      per_batch_us[b] = std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(count);
    }
  };

  const auto wall0 = std::chrono::steady_clock::now();
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  const auto wall1 = std::chrono::steady_clock::now();

  for (auto d : degenerate) out.degenerate += d;
  std::sort(per_batch_us.begin(), per_batch_us.end());
  out.timing.streamlines = n;
  out.timing.batches = n_batches;
  out.timing.total_seconds = std::chrono::duration<double>(wall1 - wall0).count();
  out.timing.median_us = quantile_sorted(per_batch_us, 0.5);
  out.timing.q1_us = quantile_sorted(per_batch_us, 0.25);
  out.timing.q3_us = quantile_sorted(per_batch_us, 0.75);
  return out;
}

/// "median (q1–q3) µs" as in a per-streamline timing table.
inline std::string format_timing(const TimingReport& t) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f–%.2f) µs per streamline; total %.3f s for %zu streamlines",
                t.median_us, t.q1_us, t.q3_us, t.total_seconds, t.streamlines);
  return buf;
}

}  // namespace tractconn::net
