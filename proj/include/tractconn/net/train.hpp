#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/geometry.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/net/adam.hpp"
#include "tractconn/net/architecture.hpp"
#include "tractconn/net/model.hpp"
#include "tractconn/random.hpp"

namespace tractconn::net {

struct TrainingConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t epochs = 150;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<double> task_loss_weights;  // empty: 1.0 for every head
  double flip_augment_prob = 0.5;
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;

  void validate() const {
    require(learning_rate > 0.0, Errc::ConfigInvalid, "learning_rate must be > 0");
    require(batch_size >= 1, Errc::ConfigInvalid, "batch_size must be >= 1");
    require(threads >= 1, Errc::ConfigInvalid, "threads must be >= 1");
    require(flip_augment_prob >= 0.0 && flip_augment_prob <= 1.0, Errc::ConfigInvalid,
            "flip_augment_prob must be in [0,1]");
    for (double w : task_loss_weights) require(w >= 0.0, Errc::ConfigInvalid, "task weights must be >= 0");
  }

  std::vector<double> weights_for(std::size_t heads) const {
    if (task_loss_weights.empty()) return std::vector<double>(heads, 1.0);
    require(task_loss_weights.size() == heads, Errc::ConfigInvalid, "one task weight per head is required");
    return task_loss_weights;
  }

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

/// Fixed-length, normalized samples with one label per task.
struct Dataset {
  std::size_t points = geometry::kDefaultPoints;
  std::vector<double> inputs;  // N x P x 3
  std::vector<std::vector<ClassId>> labels;

  std::size_t size() const { return labels.empty() ? 0 : labels.front().size(); }
  std::size_t sample_width() const { return points * 3; }

  std::span<const double> sample(std::size_t i) const {
    return {inputs.data() + i * sample_width(), sample_width()};
  }
};

struct IngestStats {
  std::size_t used = 0;
  std::size_t degenerate = 0;
};

/// Adds up to `cap` streamlines of one subject (all when cap == 0), labelled
/// per task from its assignment lists. Zero-length streamlines are skipped and
/// counted.
inline IngestStats append_subject(Dataset& data, const Tractogram& tracks,
                                  std::span<const io::AssignmentList> assignments,
                                  std::span<const ParcellationScheme> schemes, const geometry::Bounds& bounds,
                                  std::size_t cap, std::uint64_t seed) {
  require(assignments.size() == schemes.size(), Errc::ShapeMismatch, "one assignment list per scheme is required");
  if (data.labels.empty()) data.labels.resize(schemes.size());
  require(data.labels.size() == schemes.size(), Errc::ShapeMismatch, "dataset task count differs");
  for (const auto& a : assignments)
    require(a.size() == tracks.size(), Errc::LineCountMismatch, "assignment list length differs from tractogram");

  std::vector<std::size_t> chosen(tracks.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (cap > 0 && cap < chosen.size()) {
    Rng rng(mix_seed(seed, 0xCA9));
    for (std::size_t i = 0; i < cap; ++i) std::swap(chosen[i], chosen[i + rng.below(chosen.size() - i)]);
    chosen.resize(cap);
    std::sort(chosen.begin(), chosen.end());
  }

  IngestStats stats;
  std::vector<double> buffer(data.sample_width());
  for (auto idx : chosen) {
    if (geometry::is_degenerate(tracks[idx])) {
      ++stats.degenerate;
      continue;
    }
    geometry::encode_input<double>(tracks[idx], data.points, bounds, buffer);
    data.inputs.insert(data.inputs.end(), buffer.begin(), buffer.end());
    for (std::size_t t = 0; t < schemes.size(); ++t) data.labels[t].push_back(encode(assignments[t][idx], schemes[t]));
    ++stats.used;
  }
  return stats;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = std::nan("");
  std::vector<double> train_accuracy;
  std::vector<double> val_accuracy;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> log;
};

struct Evaluation {
  double loss = 0.0;
  std::vector<double> accuracy;
};

namespace detail {

inline void check_dataset(const Dataset& data, const Architecture& arch) {
  require(data.points == arch.input_points, Errc::ShapeMismatch, "dataset point count differs from architecture");
  require(data.labels.size() == arch.num_heads(), Errc::ShapeMismatch, "dataset task count differs from heads");
  require(data.inputs.size() == data.size() * data.sample_width(), Errc::ShapeMismatch, "dataset inputs are ragged");
  for (std::size_t t = 0; t < data.labels.size(); ++t) {
    require(data.labels[t].size() == data.size(), Errc::ShapeMismatch, "dataset label lists differ in length");
    for (auto y : data.labels[t])
      if (y >= arch.head_classes[t]) fail(Errc::LabelOutOfRange, "label " + std::to_string(y) + " out of range");
  }
}

// Runs `fn(begin, end, worker)` over [0, n) split into contiguous chunks.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back([&fn, n, w, workers] { fn(n * w / workers, n * (w + 1) / workers, w); });
  fn(std::size_t{0}, n / workers, std::size_t{0});
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline Evaluation evaluate(const ModelParams& params, const Dataset& data, std::span<const double> task_weights,
                           std::size_t batch_size = 1024) {
  detail::check_dataset(data, params.arch);
  require(data.size() > 0, Errc::EmptyInput, "cannot evaluate on an empty dataset");
  const auto fw = ForwardWeights<double>::from(params);
  const std::size_t heads = params.arch.num_heads();
  Evaluation out;
  out.accuracy.assign(heads, 0.0);
  Activations<double> acts;
  std::vector<std::span<const ClassId>> labels(heads);
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    for (std::size_t t = 0; t < heads; ++t) labels[t] = std::span<const ClassId>(data.labels[t]).subspan(start, n);
    forward<double>(fw, std::span<const double>(data.inputs).subspan(start * data.sample_width(), n * data.sample_width()),
                    n, acts);
    const auto ce = cross_entropy(acts, labels, task_weights, 1.0);
    out.loss += ce.total;
    for (std::size_t t = 0; t < heads; ++t) out.accuracy[t] += static_cast<double>(ce.correct[t]);
  }
  out.loss /= static_cast<double>(data.size());
  for (auto& a : out.accuracy) a /= static_cast<double>(data.size());
  return out;
}

/// Mini-batch Adam on the summed multi-task cross-entropy. Given the same
/// seed and thread count the trajectory is bit-identical.
inline TrainResult train(ModelParams params, const Dataset& data, const Dataset* validation,
                         const TrainingConfig& config,
                         const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  config.validate();
  detail::check_dataset(data, params.arch);
  if (validation) detail::check_dataset(*validation, params.arch);
  require(data.size() > 0 || config.epochs == 0, Errc::EmptyInput, "training set is empty");

  const auto layout = params.layout();
  const auto weights = config.weights_for(params.arch.num_heads());
  const std::size_t heads = params.arch.num_heads();
  const std::size_t P = data.points;
  const std::size_t width = data.sample_width();
  AdamState state(layout.total);
  Rng rng(mix_seed(config.rng_seed, 0x7A11));

  const std::size_t workers = std::max<std::size_t>(1, config.threads);
  std::vector<Activations<double>> acts(workers);
  std::vector<std::vector<double>> grads(workers, std::vector<double>(layout.total));
  std::vector<LossBreakdown> losses(workers);

  std::vector<std::size_t> order(data.size());
  std::vector<double> batch_inputs;
  std::vector<std::vector<ClassId>> batch_labels(heads);
  TrainResult result;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::vector<double> correct(heads, 0.0);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t B = std::min(config.batch_size, order.size() - start);
      batch_inputs.resize(B * width);
      for (auto& l : batch_labels) l.resize(B);
      for (std::size_t b = 0; b < B; ++b) {
        const auto src = data.sample(order[start + b]);
        double* dst = batch_inputs.data() + b * width;
        const bool flip = rng.bernoulli(config.flip_augment_prob);
        for (std::size_t p = 0; p < P; ++p) {
          const std::size_t from = flip ? P - 1 - p : p;
          std::copy(src.begin() + 3 * from, src.begin() + 3 * from + 3, dst + 3 * p);
        }
        for (std::size_t t = 0; t < heads; ++t) batch_labels[t][b] = data.labels[t][order[start + b]];
      }

      const auto fw = ForwardWeights<double>::from(params);
      const double scale = 1.0 / static_cast<double>(B);
      detail::parallel_chunks(B, workers, [&](std::size_t lo, std::size_t hi, std::size_t w) {
        std::fill(grads[w].begin(), grads[w].end(), 0.0);
        losses[w] = {};
        if (hi == lo) return;
        const std::size_t n = hi - lo;
        const auto in = std::span<const double>(batch_inputs).subspan(lo * width, n * width);
        std::vector<std::span<const ClassId>> labels(heads);
        for (std::size_t t = 0; t < heads; ++t) labels[t] = std::span<const ClassId>(batch_labels[t]).subspan(lo, n);
        forward<double>(fw, in, n, acts[w]);
        std::vector<std::vector<double>> dlogits;
        losses[w] = cross_entropy(acts[w], labels, weights, scale, &dlogits);
        backward(params, layout, in, acts[w], dlogits, grads[w]);
      });
      const std::size_t used = std::min(workers, B);
      for (std::size_t w = 1; w < used; ++w)
        for (std::size_t i = 0; i < layout.total; ++i) grads[0][i] += grads[w][i];
      for (std::size_t w = 0; w < used; ++w) {
        loss_sum += losses[w].total;
        for (std::size_t t = 0; t < heads; ++t) correct[t] += static_cast<double>(losses[w].correct[t]);
      }
      for (double g : grads[0])
        if (!std::isfinite(g)) fail(Errc::NonFiniteGradient, "non-finite gradient at epoch " + std::to_string(epoch));
      adam_step(params.values, grads[0], state, config.adam());
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(data.size());
    for (double c : correct) record.train_accuracy.push_back(c / static_cast<double>(data.size()));
    if (validation && validation->size() > 0) {
      const auto eval = evaluate(params, *validation, weights);
      record.val_loss = eval.loss;
      record.val_accuracy = eval.accuracy;
    }
    if (on_epoch) on_epoch(record);
    result.log.push_back(std::move(record));
  }
  result.params = std::move(params);
  return result;
}

/// epoch,train_loss,val_loss,train_acc_<t>...,val_acc_<t>...
inline std::string format_training_log(const std::vector<EpochRecord>& log, std::size_t heads) {
  std::string out = "epoch,train_loss,val_loss";
  for (std::size_t t = 0; t < heads; ++t) out += ",train_acc_" + std::to_string(t);
  for (std::size_t t = 0; t < heads; ++t) out += ",val_acc_" + std::to_string(t);
  out += '\n';
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return std::string(buf);
  };
  for (const auto& r : log) {
    out += std::to_string(r.epoch) + "," + num(r.train_loss) + "," + num(r.val_loss);
    for (std::size_t t = 0; t < heads; ++t)
      out += "," + (t < r.train_accuracy.size() ? num(r.train_accuracy[t]) : std::string("nan"));
    for (std::size_t t = 0; t < heads; ++t)
      out += "," + (t < r.val_accuracy.size() ? num(r.val_accuracy[t]) : std::string("nan"));
    out += '\n';
  }
  return out;
}

}  // namespace tractconn::net
