#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "tractconn/error.hpp"
#include "tractconn/label_codec.hpp"

namespace tractconn::stats {

inline double accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
  require(predicted.size() == truth.size(), Errc::LengthMismatch, "prediction and truth lengths differ");
  require(!truth.empty(), Errc::EmptyInput, "accuracy of an empty sequence");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

struct ClassificationReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::map<ClassId, double> per_class_f1;
};

/// Per-class F1 over every class that occurs in either sequence; classes
/// with an empty precision or recall denominator score 0.
inline ClassificationReport classification_report(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
  ClassificationReport report;
  report.accuracy = accuracy(predicted, truth);
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<ClassId, Counts> counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++counts[truth[i]].tp;
    } else {
      ++counts[predicted[i]].fp;
      ++counts[truth[i]].fn;
    }
  }
  double sum = 0.0;
  for (const auto& [label, c] : counts) {
    const double precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    const double recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    report.per_class_f1[label] = f1;
    sum += f1;
  }
  report.macro_f1 = sum / static_cast<double>(counts.size());
  return report;
}

inline double macro_f1(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
  return classification_report(predicted, truth).macro_f1;
}

}  // namespace tractconn::stats
