#pragma once

#include "glassbox/dataset.hpp"
#include "glassbox/models.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace glassbox {

struct ThresholdPair {
  double tau_pos = 0.5;
  double tau_neg = 0.5;
};

enum class Side { kPositive, kNegative };

const char* to_string(Side side);

struct Cluster {
  Side side = Side::kPositive;
  std::vector<Index> members;  // row indices into the dataset, ascending
  std::vector<double> presence;
  double label_mix = 0.0;  // fraction of members with true label 1

  double absence(std::size_t f) const { return 1.0 - presence[f]; }
};

struct ContrastSplit {
  std::vector<Index> positives;
  std::vector<Index> negatives;
};

/// Items with score >= tau_pos are positives, score <= tau_neg negatives;
/// the middle band is dropped. With tau_pos == tau_neg the boundary goes to
/// positives only.
ContrastSplit contrast_filter(std::span<const double> scores, const ThresholdPair& thresholds);

/// Clusters the given rows of a binary dataset with k-means. An empty k asks
/// for automatic selection: k in [1, min(10, n)] maximizing mean silhouette
/// (k = 1 scores 0; ties go to the smaller k).
std::vector<Cluster> cluster_side(const Dataset& d, std::span<const Index> indices, std::optional<int> k,
                                  std::uint64_t seed, Side side = Side::kPositive);

/// One-vs-rest gini importance of feature f for membership in cluster c,
/// pooled over the members of all clusters and normalized by the parent
/// impurity. 0 when the pool is pure.
double rank_discriminative(const Dataset& d, const std::vector<Cluster>& clusters, Index f, std::size_t c);

struct SignatureMatrix {
  std::vector<Cluster> clusters;  // positive side first
  /// discriminativeness(c, f)
  RowMatrixXd discriminativeness;
  /// Rows of the dataset that were projected, in projection order.
  std::vector<Index> projected_items;
  RowMatrixXd projection;
  int k_pos = 0;
  int k_neg = 0;
  ThresholdPair thresholds;
  std::uint64_t seed = 0;
};

/// Raised when the contrast step leaves one side without items.
class EmptySideError : public InputError {
 public:
  using InputError::InputError;
};

/// model -> contrast -> cluster -> rank, plus a t-SNE projection of the
/// retained items.
SignatureMatrix build_signatures(const Dataset& d, const Predictor& model, const ThresholdPair& thresholds,
                                 std::optional<int> k_pos, std::optional<int> k_neg, std::uint64_t seed);

/// Exact t-SNE of the rows with the engine's fixed hyperparameters.
RowMatrixXd project_items(const RowMatrixXd& rows, std::uint64_t seed, double perplexity = 30.0);

}  // namespace glassbox
