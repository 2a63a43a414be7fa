#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tractconn/error.hpp"
#include "tractconn/graph/louvain.hpp"
#include "tractconn/graph/metrics.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/stats/similarity.hpp"

namespace tractconn::graph {

inline constexpr std::array<std::string_view, 6> kMeasureNames = {
    "characteristic_path_length", "global_efficiency", "clustering_coefficient",
    "local_efficiency",           "modularity",        "assortativity"};

struct NetworkMeasures {
  std::array<double, 6> values{};  // in kMeasureNames order
  double infinite_path_fraction = 0.0;
};

inline NetworkMeasures network_measures(const WeightedGraph& g, std::uint64_t louvain_seed,
                                        AssortativityMode mode = AssortativityMode::Strength) {
  NetworkMeasures m;
  const auto path = characteristic_path_length(g);
  m.values[0] = path.length;
  m.infinite_path_fraction = path.infinite_fraction;
  m.values[1] = global_efficiency(g);
  m.values[2] = clustering_coefficient(g);
  m.values[3] = local_efficiency(g);
  m.values[4] = modularity_louvain(g, louvain_seed).q;
  m.values[5] = assortativity(g, mode);
  return m;
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

/// Pearson r with the two-sided p of t = r sqrt((n-2)/(1-r^2)), df = n-2.
inline Correlation correlation_test(std::span<const double> x, std::span<const double> y) {
  require(x.size() >= 3, Errc::TooFewPairs, "correlation p-value needs at least three subjects");
  const double r = stats::pearson(x, y);
  const double df = static_cast<double>(x.size() - 2);
  if (std::abs(r) >= 1.0) return {r, 0.0};
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return {r, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))};
}

struct MeasureRow {
  std::string scheme;
  std::string measure;
  Correlation corr;
};

struct NetworkReport {
  std::uint64_t seed = 0;
  std::vector<MeasureRow> rows;
};

/// Correlates each measure between traditional and predicted connectomes
/// across subjects. Every scheme gets six rows.
inline void add_scheme(NetworkReport& report, const std::string& scheme, const std::vector<CountMatrix>& traditional,
                       const std::vector<CountMatrix>& predicted,
                       AssortativityMode mode = AssortativityMode::Strength) {
  require(traditional.size() == predicted.size(), Errc::SubjectMismatch, "traditional and predicted sets differ in size");
  require(traditional.size() >= 3, Errc::TooFewPairs, "network report needs at least three subjects");
  std::array<std::vector<double>, 6> trad;
  std::array<std::vector<double>, 6> pred;
  for (std::size_t s = 0; s < traditional.size(); ++s) {
    const auto t = network_measures(prepare(traditional[s]), report.seed, mode);
    const auto p = network_measures(prepare(predicted[s]), report.seed, mode);
    for (std::size_t k = 0; k < 6; ++k) {
      trad[k].push_back(t.values[k]);
      pred[k].push_back(p.values[k]);
    }
  }
  for (std::size_t k = 0; k < 6; ++k)
    report.rows.push_back({scheme, std::string(kMeasureNames[k]), correlation_test(trad[k], pred[k])});
}

inline std::string format_csv(const NetworkReport& report) {
  std::string out = "# louvain_seed=" + std::to_string(report.seed) + "\nscheme,measure,r,p\n";
  char buf[256];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6g\n", row.scheme.c_str(), row.measure.c_str(), row.corr.r,
                  row.corr.p);
    out += buf;
  }
  return out;
}

}  // namespace tractconn::graph
