#pragma once

// Dense kernels for the point-cloud network. Rows are independent: every
// output row is produced by the same instruction sequence whatever the number
// of rows, so results do not depend on batch size or batch composition.

#include <algorithm>
#include <cstddef>
#include <cstdint>

namespace tractconn::net::kernels {

#if defined(__GNUC__) || defined(__clang__)
#define TRACTCONN_RESTRICT __restrict__
#else
#define TRACTCONN_RESTRICT
#endif

inline constexpr std::size_t kRowBlock = 4;

/// y = x * W^T + b, optionally rectified. `wt` is W transposed (in x out).
template <class T>
void dense_forward(const T* TRACTCONN_RESTRICT x, std::size_t rows, std::size_t in, const T* TRACTCONN_RESTRICT wt,
                   const T* TRACTCONN_RESTRICT bias, std::size_t out, T* TRACTCONN_RESTRICT y, bool relu) {
  for (std::size_t r0 = 0; r0 < rows; r0 += kRowBlock) {
    const std::size_t rn = std::min(kRowBlock, rows - r0);
    for (std::size_t r = 0; r < rn; ++r) std::copy(bias, bias + out, y + (r0 + r) * out);
    for (std::size_t k = 0; k < in; ++k) {
      const T* TRACTCONN_RESTRICT w = wt + k * out;
      for (std::size_t r = 0; r < rn; ++r) {
        const T xv = x[(r0 + r) * in + k];
        if (xv == T(0)) continue;
        T* TRACTCONN_RESTRICT yr = y + (r0 + r) * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] += xv * w[o];
      }
    }
    if (relu) {
      for (std::size_t r = 0; r < rn; ++r) {
        T* TRACTCONN_RESTRICT yr = y + (r0 + r) * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = yr[o] > T(0) ? yr[o] : (yr[o] == yr[o] ? T(0) : yr[o]);
      }
    }
  }
}

/// Accumulates dW += dy^T x, db += colsum(dy) and, when dx is non-null,
/// dx += dy W. `w` is row-major out x in.
template <class T>
void dense_backward(const T* TRACTCONN_RESTRICT x, std::size_t rows, std::size_t in, const T* TRACTCONN_RESTRICT w,
                    std::size_t out, const T* TRACTCONN_RESTRICT dy, T* TRACTCONN_RESTRICT dx,
                    T* TRACTCONN_RESTRICT dw, T* TRACTCONN_RESTRICT db) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* TRACTCONN_RESTRICT g = dy + r * out;
    const T* TRACTCONN_RESTRICT xr = x + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const T go = g[o];
      if (go == T(0)) continue;
      db[o] += go;
      T* TRACTCONN_RESTRICT dwo = dw + o * in;
      for (std::size_t k = 0; k < in; ++k) dwo[k] += go * xr[k];
    }
    if (dx == nullptr) continue;
    T* TRACTCONN_RESTRICT dxr = dx + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const T go = g[o];
      if (go == T(0)) continue;
      const T* TRACTCONN_RESTRICT wo = w + o * in;
      for (std::size_t k = 0; k < in; ++k) dxr[k] += go * wo[k];
    }
  }
}

/// Zeroes gradient entries whose rectified activation is not positive.
template <class T>
void relu_backward(const T* TRACTCONN_RESTRICT activation, std::size_t n, T* TRACTCONN_RESTRICT grad) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(activation[i] > T(0))) grad[i] = T(0);
}

/// Max over the `points` rows of each sample; ties go to the lowest index.
template <class T>
void maxpool_forward(const T* TRACTCONN_RESTRICT act, std::size_t batch, std::size_t points, std::size_t channels,
                     T* TRACTCONN_RESTRICT pooled, std::uint32_t* TRACTCONN_RESTRICT argmax) {
  for (std::size_t b = 0; b < batch; ++b) {
    const T* base = act + b * points * channels;
    T* best = pooled + b * channels;
    std::uint32_t* idx = argmax + b * channels;
    std::copy(base, base + channels, best);
    std::fill(idx, idx + channels, 0u);
    for (std::size_t p = 1; p < points; ++p) {
      const T* row = base + p * channels;
      for (std::size_t c = 0; c < channels; ++c) {
        if (row[c] > best[c]) {
          best[c] = row[c];
          idx[c] = static_cast<std::uint32_t>(p);
        }
      }
    }
  }
}

template <class T>
void maxpool_backward(const std::uint32_t* TRACTCONN_RESTRICT argmax, std::size_t batch, std::size_t points,
                      std::size_t channels, const T* TRACTCONN_RESTRICT dpooled, T* TRACTCONN_RESTRICT dact) {
  std::fill(dact, dact + batch * points * channels, T(0));
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      dact[(b * points + argmax[b * channels + c]) * channels + c] = dpooled[b * channels + c];
}

}  // namespace tractconn::net::kernels
