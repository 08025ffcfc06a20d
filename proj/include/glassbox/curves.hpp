#pragma once

#include "glassbox/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace glassbox {

/// Threshold-indexed classifier quality. Thresholds are the descending unique
/// scores; an item is predicted positive iff score >= threshold.
struct CurveSet {
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> accuracy;
  std::vector<std::int64_t> tp;
  std::vector<std::int64_t> fp;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  bool roc_defined = true;
  double auc = 0.0;  // NaN when !roc_defined
};

struct ContingencyMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ContingencyMatrix&) const = default;
};

/// Raised when labels are single-class and an ROC was requested.
class RocUndefinedError : public InputError {
 public:
  RocUndefinedError() : InputError("ROC undefined: labels contain a single class") {}
};

/// ROC/PR/accuracy sweep. AUC is the trapezoid over (fpr, tpr) starting at
/// (0, 0); tied scores flip together. With allow_single_class, single-class
/// labels yield roc_defined = false (tpr/fpr of the empty class read 0)
/// instead of throwing.
CurveSet score_curves(std::span<const int> labels, std::span<const double> scores,
                      bool allow_single_class = false);

ContingencyMatrix contingency_at(std::span<const int> labels, std::span<const double> scores, double threshold);

}  // namespace glassbox
