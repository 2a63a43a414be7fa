#pragma once

// Cohort-level comparisons: predicted-vs-traditional intra/inter-subject
// similarity and test-retest reproducibility.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/stats/similarity.hpp"
#include "tractconn/stats/wilcoxon.hpp"

namespace tractconn::stats {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  require(!v.empty(), Errc::EmptyInput, "mean of an empty sample");
  MeanSd out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

struct SubjectSimilarity {
  double intra_pearson = 0.0;
  double inter_pearson = 0.0;  // mean over the other subjects
  double intra_lerm = 0.0;
  double inter_lerm = 0.0;
};

struct IntraInterReport {
  std::vector<std::string> subjects;
  std::vector<SubjectSimilarity> rows;
  WilcoxonResult pearson_test;
  WilcoxonResult lerm_test;
  double shift_epsilon = 1.0;
};

/// intra_i = sim(pred_i, trad_i); inter_i = mean_{j != i} sim(pred_i, trad_j).
/// Paired Wilcoxon tests compare intra against inter for both metrics.
inline IntraInterReport intra_inter_analysis(const std::vector<CountMatrix>& predicted,
                                             const std::vector<CountMatrix>& traditional,
                                             std::vector<std::string> subjects = {},
                                             const ShiftPolicy& policy = {}) {
  require(predicted.size() == traditional.size(), Errc::SubjectMismatch, "predicted and traditional sets differ in size");
  const std::size_t n = predicted.size();
  require(n >= 2, Errc::TooFewPairs, "intra/inter analysis needs at least two subjects");
  if (subjects.empty())
    for (std::size_t i = 0; i < n; ++i) subjects.push_back("subject-" + std::to_string(i));
  require(subjects.size() == n, Errc::SubjectMismatch, "subject id count differs");

  std::vector<SymmetricSpectrum> pred_spec;
  std::vector<SymmetricSpectrum> trad_spec;
  for (std::size_t i = 0; i < n; ++i) {
    pred_spec.push_back(SymmetricSpectrum::of(predicted[i]));
    trad_spec.push_back(SymmetricSpectrum::of(traditional[i]));
  }

  IntraInterReport report;
  report.subjects = std::move(subjects);
  report.shift_epsilon = policy.epsilon;
  report.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = report.rows[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double r = pearson_upper(predicted[i], traditional[j]);
      const double d = lerm(pred_spec[i], trad_spec[j], policy).distance;
      if (i == j) {
        row.intra_pearson = r;
        row.intra_lerm = d;
      } else {
        row.inter_pearson += r / static_cast<double>(n - 1);
        row.inter_lerm += d / static_cast<double>(n - 1);
      }
    }
  }

  std::vector<double> intra_r, inter_r, intra_d, inter_d;
  for (const auto& row : report.rows) {
    intra_r.push_back(row.intra_pearson);
    inter_r.push_back(row.inter_pearson);
    intra_d.push_back(row.intra_lerm);
    inter_d.push_back(row.inter_lerm);
  }
  report.pearson_test = wilcoxon_signed_rank(intra_r, inter_r);
  report.lerm_test = wilcoxon_signed_rank(intra_d, inter_d);
  return report;
}

inline std::string format_csv(const IntraInterReport& report) {
  std::string out = "subject,intra_pearson,inter_pearson,intra_lerm,inter_lerm\n";
  char buf[256];
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g\n", report.subjects[i].c_str(), r.intra_pearson,
                  r.inter_pearson, r.intra_lerm, r.inter_lerm);
    out += buf;
  }
  return out;
}

inline std::string format_summary(const IntraInterReport& report) {
  std::vector<double> intra_r, inter_r, intra_d, inter_d;
  for (const auto& r : report.rows) {
    intra_r.push_back(r.intra_pearson);
    inter_r.push_back(r.inter_pearson);
    intra_d.push_back(r.intra_lerm);
    inter_d.push_back(r.inter_lerm);
  }
  auto cell = [](const MeanSd& m) {
    char b[64];
    std::snprintf(b, sizeof b, "%.4f +/- %.4f", m.mean, m.sd);
    return std::string(b);
  };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-8s %-22s %-22s %-12s %s\n", "metric", "intra", "inter", "wilcoxon_p", "method");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-8s %-22s %-22s %-12.3g %s\n", "pearson", cell(mean_sd(intra_r)).c_str(),
                cell(mean_sd(inter_r)).c_str(), report.pearson_test.p_value,
                report.pearson_test.exact ? "exact" : "normal");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-8s %-22s %-22s %-12.3g %s\n", "lerm", cell(mean_sd(intra_d)).c_str(),
                cell(mean_sd(inter_d)).c_str(), report.lerm_test.p_value, report.lerm_test.exact ? "exact" : "normal");
  out += buf;
  std::snprintf(buf, sizeof buf, "n = %zu, LERM shift epsilon = %g\n", report.rows.size(), report.shift_epsilon);
  return out + buf;
}

struct RetestReport {
  std::vector<std::string> subjects;
  std::vector<double> pearson;
  std::vector<double> lerm;
  MeanSd pearson_summary;
  MeanSd lerm_summary;
};

/// Per-subject similarity between two sessions of the same subjects.
inline RetestReport test_retest(const std::vector<CountMatrix>& session1, const std::vector<CountMatrix>& session2,
                                std::vector<std::string> subjects = {}, const ShiftPolicy& policy = {}) {
  require(session1.size() == session2.size(), Errc::SubjectMismatch, "sessions list different subject counts");
  require(!session1.empty(), Errc::EmptyInput, "test-retest needs at least one subject");
  if (subjects.empty())
    for (std::size_t i = 0; i < session1.size(); ++i) subjects.push_back("subject-" + std::to_string(i));
  require(subjects.size() == session1.size(), Errc::SubjectMismatch, "subject id count differs");
  RetestReport r;
  r.subjects = std::move(subjects);
  for (std::size_t i = 0; i < session1.size(); ++i) {
    require(session1[i].rows() == session2[i].rows(), Errc::SubjectMismatch,
            "subject " + r.subjects[i] + " sessions use different schemes");
    r.pearson.push_back(pearson_upper(session1[i], session2[i]));
    r.lerm.push_back(lerm(session1[i], session2[i], policy).distance);
  }
  r.pearson_summary = mean_sd(r.pearson);
  r.lerm_summary = mean_sd(r.lerm);
  return r;
}

inline std::string format_csv(const RetestReport& r) {
  std::string out = "subject,pearson,lerm\n";
  char buf[256];
  for (std::size_t i = 0; i < r.subjects.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g\n", r.subjects[i].c_str(), r.pearson[i], r.lerm[i]);
    out += buf;
  }
  return out;
}

/// One row of a reproducibility table: "scheme  method  r ± sd  lerm ± sd".
inline std::string format_retest_row(const std::string& scheme, const std::string& method, const RetestReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-14s %.3f +/- %.3f   %.2f +/- %.2f\n", scheme.c_str(), method.c_str(),
                r.pearson_summary.mean, r.pearson_summary.sd, r.lerm_summary.mean, r.lerm_summary.sd);
  return buf;
}

inline std::string retest_table_header() {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %-14s %-15s %s\n", "scheme", "connectome", "pearson", "lerm");
  return buf;
}

}  // namespace tractconn::stats
