#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "tractconn/error.hpp"

namespace tractconn::stats {

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // pairs after dropping zero differences
  bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactMax = 12;
inline constexpr std::size_t kWilcoxonMinPairs = 5;

namespace detail {

// Average ranks (1-based) of |d|.
inline std::vector<double> average_ranks(const std::vector<double>& values, double& tie_term) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Two-sided Wilcoxon signed-rank test on d = x - y with zero differences
/// dropped. Exact enumeration of all 2^n sign patterns for n <= 12 (handles
/// tied ranks); otherwise the normal approximation with tie and continuity
/// corrections.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                           WilcoxonMethod method = WilcoxonMethod::Auto) {
  require(x.size() == y.size(), Errc::LengthMismatch, "wilcoxon: samples differ in length");
  std::vector<double> magnitude;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d == 0.0) continue;
    magnitude.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  if (magnitude.empty()) fail(Errc::AllZeroDifferences, "wilcoxon: every difference is zero");
  const std::size_t n = magnitude.size();
  if (n < kWilcoxonMinPairs)
    fail(Errc::TooFewPairs, "wilcoxon needs at least " + std::to_string(kWilcoxonMinPairs) + " nonzero differences");

  double tie_term = 0.0;
  const auto ranks = detail::average_ranks(magnitude, tie_term);
  const double total = static_cast<double>(n * (n + 1)) / 2.0;
  WilcoxonResult r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i)
    if (positive[i]) r.w_plus += ranks[i];
  r.statistic = std::min(r.w_plus, total - r.w_plus);

  const bool exact = method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && n <= kWilcoxonExactMax);
  if (exact) {
    require(n <= 24, Errc::InvalidArgument, "exact wilcoxon enumeration limited to n <= 24");
    // Ranks are multiples of 1/2; count sign patterns by doubled rank sums.
    std::vector<std::uint32_t> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<std::uint32_t>(std::lround(2.0 * ranks[i]));
    const std::uint32_t max_sum = std::accumulate(doubled.begin(), doubled.end(), 0u);
    std::vector<double> ways(max_sum + 1, 0.0);
    ways[0] = 1.0;
    for (auto d : doubled)
      for (std::uint32_t s = max_sum; s >= d; --s) ways[s] += ways[s - d];
    const auto observed = static_cast<std::uint32_t>(std::lround(2.0 * r.statistic));
    double tail = 0.0;
    for (std::uint32_t s = 0; s <= max_sum; ++s)
      if (s <= observed || s >= max_sum - observed) tail += ways[s];
    r.p_value = std::min(1.0, tail / std::ldexp(1.0, static_cast<int>(n)));
    r.exact = true;
  } else {
    const double mean = total / 2.0;
    const double nd = static_cast<double>(n);
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (!(variance > 0.0)) {
      r.p_value = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(variance);
      r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
  }
  return r;
}

}  // namespace tractconn::stats
