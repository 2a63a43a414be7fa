#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/net/architecture.hpp"
#include "tractconn/net/kernels.hpp"

namespace tractconn::net {

/// One affine layer laid out for the forward kernel (weights transposed).
template <class T>
struct DenseWeights {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<T> wt;  // in x out
  std::vector<T> bias;
};

/// Forward-pass view of a ModelParams in precision T.
template <class T>
struct ForwardWeights {
  Architecture arch;
  std::vector<DenseWeights<T>> point;
  std::vector<DenseWeights<T>> trunk;
  std::vector<DenseWeights<T>> heads;

  static ForwardWeights from(const ModelParams& params) {
    const auto layout = params.layout();
    require(params.values.size() == layout.total, Errc::ShapeMismatch, "parameter vector does not match architecture");
    ForwardWeights fw;
    fw.arch = params.arch;
    auto convert = [&](const std::vector<LayerShape>& shapes, std::vector<DenseWeights<T>>& dst) {
      for (const auto& l : shapes) {
        DenseWeights<T> d{l.in, l.out, std::vector<T>(l.in * l.out), std::vector<T>(l.out)};
        for (std::size_t o = 0; o < l.out; ++o) {
          for (std::size_t k = 0; k < l.in; ++k)
            d.wt[k * l.out + o] = static_cast<T>(params.values[l.weight_offset + o * l.in + k]);
          d.bias[o] = static_cast<T>(params.values[l.bias_offset + o]);
        }
        dst.push_back(std::move(d));
      }
    };
    convert(layout.point, fw.point);
    convert(layout.trunk, fw.trunk);
    convert(layout.heads, fw.heads);
    return fw;
  }
};

/// Everything the backward pass needs from a forward pass.
template <class T>
struct Activations {
  std::size_t batch = 0;
  std::vector<std::vector<T>> point;  // (batch*P) x width, rectified
  std::vector<T> pooled;              // batch x feature_width
  std::vector<std::uint32_t> argmax;  // batch x feature_width
  std::vector<std::vector<T>> trunk;  // batch x width, rectified
  std::vector<std::vector<T>> logits;  // per head, batch x classes

  const std::vector<T>& embedding() const { return trunk.empty() ? pooled : trunk.back(); }
};

/// `inputs` holds batch x P x 3 normalized coordinates.
template <class T>
void forward(const ForwardWeights<T>& w, std::span<const T> inputs, std::size_t batch, Activations<T>& acts) {
  const auto& arch = w.arch;
  const std::size_t P = arch.input_points;
  require(inputs.size() == batch * P * 3, Errc::ShapeMismatch,
          "input has " + std::to_string(inputs.size()) + " values, expected " + std::to_string(batch * P * 3));
  acts.batch = batch;
  acts.point.resize(w.point.size());
  acts.trunk.resize(w.trunk.size());
  acts.logits.resize(w.heads.size());

  const T* x = inputs.data();
  std::size_t width = 3;
  for (std::size_t l = 0; l < w.point.size(); ++l) {
    const auto& layer = w.point[l];
    acts.point[l].resize(batch * P * layer.out);
    kernels::dense_forward(x, batch * P, width, layer.wt.data(), layer.bias.data(), layer.out, acts.point[l].data(),
                           true);
    x = acts.point[l].data();
    width = layer.out;
  }

  acts.pooled.resize(batch * width);
  acts.argmax.resize(batch * width);
  kernels::maxpool_forward(x, batch, P, width, acts.pooled.data(), acts.argmax.data());
  x = acts.pooled.data();

  for (std::size_t l = 0; l < w.trunk.size(); ++l) {
    const auto& layer = w.trunk[l];
    acts.trunk[l].resize(batch * layer.out);
    kernels::dense_forward(x, batch, width, layer.wt.data(), layer.bias.data(), layer.out, acts.trunk[l].data(), true);
    x = acts.trunk[l].data();
    width = layer.out;
  }

  for (std::size_t h = 0; h < w.heads.size(); ++h) {
    const auto& layer = w.heads[h];
    acts.logits[h].resize(batch * layer.out);
    kernels::dense_forward(x, batch, width, layer.wt.data(), layer.bias.data(), layer.out, acts.logits[h].data(),
                           false);
    for (T v : acts.logits[h])
      if (!std::isfinite(v)) fail(Errc::NonFiniteActivation, "non-finite logit in head " + std::to_string(h));
  }
}

template <class T>
std::size_t argmax_row(const T* row, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

struct LossBreakdown {
  double total = 0.0;                 // sum_t w_t * mean cross-entropy (before `scale`)
  std::vector<double> per_task;       // unweighted sums over the batch
  std::vector<std::size_t> correct;   // argmax hits per task
};

/// Softmax cross-entropy for every head. When `dlogits` is non-null it is
/// filled with d(scale * sum_t w_t * sum_b CE_tb)/d logits; callers pass
/// scale = 1/B for a mean over a batch of B.
template <class T>
LossBreakdown cross_entropy(const Activations<T>& acts, std::span<const std::span<const ClassId>> labels,
                            std::span<const double> task_weights, double scale,
                            std::vector<std::vector<T>>* dlogits = nullptr) {
  const std::size_t batch = acts.batch;
  require(labels.size() == acts.logits.size(), Errc::ShapeMismatch, "label sets do not match number of heads");
  require(task_weights.size() == acts.logits.size(), Errc::ShapeMismatch, "task weights do not match heads");
  LossBreakdown out;
  out.per_task.assign(acts.logits.size(), 0.0);
  out.correct.assign(acts.logits.size(), 0);
  if (dlogits) dlogits->resize(acts.logits.size());
  for (std::size_t h = 0; h < acts.logits.size(); ++h) {
    const std::size_t K = acts.logits[h].size() / std::max<std::size_t>(batch, 1);
    require(labels[h].size() == batch, Errc::ShapeMismatch, "label count does not match batch");
    if (dlogits) (*dlogits)[h].assign(batch * K, T(0));
    for (std::size_t b = 0; b < batch; ++b) {
      const ClassId y = labels[h][b];
      if (y >= K) fail(Errc::LabelOutOfRange, "label " + std::to_string(y) + " >= " + std::to_string(K));
      const T* row = acts.logits[h].data() + b * K;
      double m = row[0];
      for (std::size_t k = 1; k < K; ++k) m = std::max(m, static_cast<double>(row[k]));
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += std::exp(static_cast<double>(row[k]) - m);
      const double lse = m + std::log(sum);
      out.per_task[h] += lse - static_cast<double>(row[y]);
      if (argmax_row(row, K) == y) ++out.correct[h];
      if (dlogits) {
        T* g = (*dlogits)[h].data() + b * K;
        const double coeff = task_weights[h] * scale;
        for (std::size_t k = 0; k < K; ++k) g[k] = static_cast<T>(coeff * std::exp(static_cast<double>(row[k]) - lse));
        g[y] -= static_cast<T>(coeff);
      }
    }
    out.total += task_weights[h] * out.per_task[h];
  }
  return out;
}

/// Accumulates into `grads` (flat, same layout as params.values) the
/// gradient given dlogits from `cross_entropy`.
inline void backward(const ModelParams& params, const ParamLayout& layout, std::span<const double> inputs,
                     const Activations<double>& acts, std::vector<std::vector<double>>& dlogits,
                     std::span<double> grads) {
  const std::size_t batch = acts.batch;
  const std::size_t P = params.arch.input_points;
  const double* W = params.values.data();
  double* G = grads.data();

  std::vector<double> d_embed(acts.embedding().size(), 0.0);
  const std::size_t embed_width = params.arch.embedding_width();
  for (std::size_t h = 0; h < layout.heads.size(); ++h) {
    const auto& l = layout.heads[h];
    kernels::dense_backward(acts.embedding().data(), batch, embed_width, W + l.weight_offset, l.out,
                            dlogits[h].data(), d_embed.data(), G + l.weight_offset, G + l.bias_offset);
  }

  std::vector<double> d_cur = std::move(d_embed);
  for (std::size_t i = layout.trunk.size(); i-- > 0;) {
    const auto& l = layout.trunk[i];
    kernels::relu_backward(acts.trunk[i].data(), d_cur.size(), d_cur.data());
    const double* x = i == 0 ? acts.pooled.data() : acts.trunk[i - 1].data();
    std::vector<double> d_prev(batch * l.in, 0.0);
    kernels::dense_backward(x, batch, l.in, W + l.weight_offset, l.out, d_cur.data(), d_prev.data(),
                            G + l.weight_offset, G + l.bias_offset);
    d_cur = std::move(d_prev);
  }

  const std::size_t C = params.arch.feature_width();
  std::vector<double> d_points(batch * P * C);
  kernels::maxpool_backward(acts.argmax.data(), batch, P, C, d_cur.data(), d_points.data());
  d_cur = std::move(d_points);

  for (std::size_t i = layout.point.size(); i-- > 0;) {
    const auto& l = layout.point[i];
    kernels::relu_backward(acts.point[i].data(), d_cur.size(), d_cur.data());
    const double* x = i == 0 ? inputs.data() : acts.point[i - 1].data();
    std::vector<double> d_prev;
    if (i > 0) d_prev.assign(batch * P * l.in, 0.0);
    kernels::dense_backward(x, batch * P, l.in, W + l.weight_offset, l.out, d_cur.data(),
                            i > 0 ? d_prev.data() : nullptr, G + l.weight_offset, G + l.bias_offset);
    d_cur = std::move(d_prev);
  }
}

/// Loss (scaled by 1/batch) and its full gradient for one batch, in 64-bit.
struct LossAndGradient {
  LossBreakdown loss;
  std::vector<double> grads;
};

inline LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const double> inputs,
                                         std::span<const std::span<const ClassId>> labels,
                                         std::span<const double> task_weights) {
  const auto layout = params.layout();
  const auto fw = ForwardWeights<double>::from(params);
  const std::size_t batch = labels.empty() ? 0 : labels[0].size();
  Activations<double> acts;
  forward(fw, inputs, batch, acts);
  std::vector<std::vector<double>> dlogits;
  LossAndGradient out;
  out.loss = cross_entropy(acts, labels, task_weights, 1.0 / static_cast<double>(batch), &dlogits);
  out.grads.assign(layout.total, 0.0);
  backward(params, layout, inputs, acts, dlogits, out.grads);
  return out;
}

/// Mean loss sum_t w_t * mean_b CE over one batch, without gradients.
inline double batch_loss(const ModelParams& params, std::span<const double> inputs,
                         std::span<const std::span<const ClassId>> labels, std::span<const double> task_weights) {
  const auto fw = ForwardWeights<double>::from(params);
  const std::size_t batch = labels.empty() ? 0 : labels[0].size();
  Activations<double> acts;
  forward(fw, inputs, batch, acts);
  return cross_entropy(acts, labels, task_weights, 1.0).total / static_cast<double>(batch);
}

}  // namespace tractconn::net
