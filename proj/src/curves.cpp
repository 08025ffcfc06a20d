#include "glassbox/curves.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace glassbox {
namespace {

void check_lengths(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InputError("labels and scores differ in length");
  for (int y : labels)
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
  for (double s : scores)
    if (std::isnan(s)) throw InputError("scores must not be NaN");
}

}  // namespace

CurveSet score_curves(std::span<const int> labels, std::span<const double> scores, bool allow_single_class) {
  check_lengths(labels, scores);
  if (labels.empty()) throw InputError("score_curves needs at least one item");

  CurveSet cs;
  for (int y : labels) (y == 1 ? cs.positives : cs.negatives) += 1;
  cs.roc_defined = cs.positives > 0 && cs.negatives > 0;
  if (!cs.roc_defined && !allow_single_class) throw RocUndefinedError();

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto n = static_cast<double>(scores.size());
  const auto pos = static_cast<double>(cs.positives);
  const auto neg = static_cast<double>(cs.negatives);
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  double auc = 0.0;
  double prev_fpr = 0.0;
  double prev_tpr = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double t = scores[order[k]];
    while (k < order.size() && scores[order[k]] == t) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    const double tpr = cs.positives > 0 ? static_cast<double>(tp) / pos : 0.0;
    const double fpr = cs.negatives > 0 ? static_cast<double>(fp) / neg : 0.0;
    cs.thresholds.push_back(t);
    cs.tp.push_back(tp);
    cs.fp.push_back(fp);
    cs.tpr.push_back(tpr);
    cs.fpr.push_back(fpr);
    cs.recall.push_back(tpr);
    cs.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    const auto tn = cs.negatives - fp;
    cs.accuracy.push_back(static_cast<double>(tp + tn) / n);
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  cs.auc = cs.roc_defined ? auc : std::numeric_limits<double>::quiet_NaN();
  return cs;
}

ContingencyMatrix contingency_at(std::span<const int> labels, std::span<const double> scores, double threshold) {
  check_lengths(labels, scores);
  ContingencyMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1)
      (predicted ? m.tp : m.fn) += 1;
    else
      (predicted ? m.fp : m.tn) += 1;
  }
  return m;
}

}  // namespace glassbox
