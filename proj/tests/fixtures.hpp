#pragma once

// Synthetic data generators and instrumentation shared by unit and
// acceptance tests.

#include "glassbox/dataset.hpp"
#include "glassbox/models.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glassbox/export.hpp"

namespace glassbox::testing {

/// Forwards to an inner predictor and counts how often it was consulted.
class CountingPredictor final : public Predictor {
 public:
  explicit CountingPredictor(PredictorPtr inner)
      : Predictor(inner->n_features()), inner_(std::move(inner)) {}
  std::string descriptor() const override { return "counting(" + inner_->descriptor() + ")"; }
  long calls() const { return calls_.load(); }

 protected:
  double score(const Eigen::Ref<const VectorXd>& x) const override {
    calls_.fetch_add(1);
    return inner_->predict(x);
  }

 private:
  PredictorPtr inner_;
  mutable std::atomic<long> calls_{0};
};

inline double normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Glucose-like driver whose risk rises with the value; half the rows have
/// the value missing and an outcome drawn independently of it at a low base
/// rate. A noise column rides along.
inline std::string valley_csv(std::uint64_t seed, int n = 2000, double missing_rate = 0.5) {
  std::mt19937_64 rng(seed);
  std::ostringstream out;
  out << "glucose,age,label\n";
  for (int i = 0; i < n; ++i) {
    const double age = std::round(20 + 60 * uniform01(rng));
    const bool missing = uniform01(rng) < missing_rate;
    const double glucose = std::round((100 + 20 * normal(rng)) * 10) / 10;
    double p = 0.1;
    if (!missing) p = 0.2 + 0.7 / (1 + std::exp(-(glucose - 100) / 8));
    const int label = uniform01(rng) < p ? 1 : 0;
    if (missing)
      out << "NA";
    else
      out << format_double(glucose);
    out << "," << format_double(age) << "," << label << "\n";
  }
  return out.str();
}

inline Dataset valley_dataset(std::uint64_t seed, int n = 2000, double missing_rate = 0.5) {
  return impute_missing(parse_csv(valley_csv(seed, n, missing_rate), {}, "label"));
}

struct TwoCauseData {
  Dataset data;
  std::vector<int> cause;  // 0 = A {f0,f1}, 1 = B {f2,f3}, -1 = negative
};

/// Binary items: positives switch on features {0,1} (cause A) or {2,3}
/// (cause B), negatives are all off; every bit then flips with probability
/// `noise`.
inline TwoCauseData two_cause_data(std::uint64_t seed, int per_cause = 100, int negatives = 200,
                                   int n_features = 10, double noise = 0.05) {
  std::mt19937_64 rng(seed);
  const int n = 2 * per_cause + negatives;
  RowMatrixXd x = RowMatrixXd::Zero(n, n_features);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> cause(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i < per_cause ? 0 : i < 2 * per_cause ? 1 : -1;
    cause[static_cast<std::size_t>(i)] = c;
    labels[static_cast<std::size_t>(i)] = c >= 0 ? 1 : 0;
    if (c == 0) x(i, 0) = x(i, 1) = 1;
    if (c == 1) x(i, 2) = x(i, 3) = 1;
    for (int f = 0; f < n_features; ++f)
      if (uniform01(rng) < noise) x(i, f) = 1 - x(i, f);
  }
  std::vector<FeatureKind> kinds(static_cast<std::size_t>(n_features), FeatureKind::kBinary);
  std::vector<std::string> names;
  for (int f = 0; f < n_features; ++f) names.push_back("f" + std::to_string(f));
  return {Dataset::FromDense(std::move(x), std::move(labels), kinds, names), std::move(cause)};
}

inline std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  for (const auto& m : d.features()) out << m.name << ",";
  out << "label\n";
  for (Index i = 0; i < d.n_rows(); ++i) {
    for (Index f = 0; f < d.n_features(); ++f) out << format_double(d.values()(i, f)) << ",";
    out << d.labels()[static_cast<std::size_t>(i)] << "\n";
  }
  return out.str();
}

/// Small random numeric dataset with labels from a noisy threshold rule.
inline Dataset random_numeric_dataset(std::mt19937_64& rng, int n, int n_features, int levels = 6) {
  RowMatrixXd x(n, n_features);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int f = 0; f < n_features; ++f) {
      x(i, f) = std::floor(uniform01(rng) * levels);
      s += (f % 2 == 0 ? 1.0 : -0.5) * x(i, f);
    }
    labels[static_cast<std::size_t>(i)] = (s + 2.0 * normal(rng)) > levels / 3.0 ? 1 : 0;
  }
  return Dataset::FromDense(std::move(x), std::move(labels));
}

}  // namespace glassbox::testing
