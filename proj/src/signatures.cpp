#include "glassbox/signatures.hpp"

#include "glassbox/kmeans.hpp"
#include "glassbox/tsne.hpp"

#include <cmath>

namespace glassbox {
namespace {

constexpr int kMaxAutoClusters = 10;

void check_binary(const Dataset& d) {
  for (const auto& meta : d.features())
    if (!meta.is_binary())
      throw InputError("feature '" + meta.name + "' is not binary; binarize features before clustering");
}

RowMatrixXd gather_rows(const Dataset& d, std::span<const Index> indices) {
  RowMatrixXd out(static_cast<Index>(indices.size()), d.n_features());
  for (std::size_t k = 0; k < indices.size(); ++k) out.row(static_cast<Index>(k)) = d.values().row(indices[k]);
  return out;
}

std::vector<Cluster> make_clusters(const Dataset& d, std::span<const Index> indices,
                                   const std::vector<int>& assignment, int k, Side side) {
  std::vector<Cluster> clusters(static_cast<std::size_t>(k));
  for (auto& c : clusters) c.side = side;
  for (std::size_t i = 0; i < indices.size(); ++i)
    clusters[static_cast<std::size_t>(assignment[i])].members.push_back(indices[i]);

  std::vector<Cluster> out;
  for (auto& c : clusters) {
    if (c.members.empty()) continue;
    std::sort(c.members.begin(), c.members.end());
    c.presence.assign(static_cast<std::size_t>(d.n_features()), 0.0);
    std::int64_t positives = 0;
    for (Index f = 0; f < d.n_features(); ++f) {
      std::int64_t present = 0;
      for (Index i : c.members) present += d.values()(i, f) == 1.0 ? 1 : 0;
      c.presence[static_cast<std::size_t>(f)] =
          static_cast<double>(present) / static_cast<double>(c.members.size());
    }
    for (Index i : c.members) positives += d.labels()[static_cast<std::size_t>(i)];
    c.label_mix = static_cast<double>(positives) / static_cast<double>(c.members.size());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

const char* to_string(Side side) { return side == Side::kPositive ? "positive" : "negative"; }

ContrastSplit contrast_filter(std::span<const double> scores, const ThresholdPair& thresholds) {
  if (!(thresholds.tau_neg <= thresholds.tau_pos))
    throw InputError("thresholds must satisfy tau_neg <= tau_pos");
  ContrastSplit split;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= thresholds.tau_pos)
      split.positives.push_back(static_cast<Index>(i));
    else if (scores[i] <= thresholds.tau_neg)
      split.negatives.push_back(static_cast<Index>(i));
  }
  return split;
}

std::vector<Cluster> cluster_side(const Dataset& d, std::span<const Index> indices, std::optional<int> k,
                                  std::uint64_t seed, Side side) {
  check_binary(d);
  if (indices.empty()) throw InputError("cannot cluster an empty set of items");
  const auto n = static_cast<int>(indices.size());
  if (k && (*k < 1 || *k > n))
    throw InputError("k=" + std::to_string(*k) + " must be in [1, " + std::to_string(n) + "]");

  const RowMatrixXd points = gather_rows(d, indices);
  if (k) {
    const auto result = kmeans(points, *k, seed);
    return make_clusters(d, indices, result.assignment, *k, side);
  }

  const RowMatrixXd distances = squared_distances(points, points);
  const int k_max = std::min(kMaxAutoClusters, n);
  std::vector<int> best_assignment(indices.size(), 0);
  int best_k = 1;
  double best_score = 0.0;
  for (int kk = 2; kk <= k_max; ++kk) {
    const auto result = kmeans(points, kk, seed);
    const double s = mean_silhouette(distances, result.assignment, kk);
    if (s > best_score) {
      best_score = s;
      best_k = kk;
      best_assignment = result.assignment;
    }
  }
  return make_clusters(d, indices, best_assignment, best_k, side);
}

double rank_discriminative(const Dataset& d, const std::vector<Cluster>& clusters, Index f, std::size_t c) {
  if (c >= clusters.size()) throw InputError("cluster id out of range");
  if (f < 0 || f >= d.n_features()) throw InputError("feature index out of range");

  // Counts: [x_f][membership].
  std::int64_t counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t cc = 0; cc < clusters.size(); ++cc)
    for (Index i : clusters[cc].members) ++counts[d.values()(i, f) == 1.0 ? 1 : 0][cc == c ? 1 : 0];

  const std::int64_t in = counts[0][1] + counts[1][1];
  const std::int64_t out = counts[0][0] + counts[1][0];
  const std::int64_t n = in + out;
  if (in == 0 || out == 0) return 0.0;
  const std::int64_t n0 = counts[0][0] + counts[0][1];
  const std::int64_t n1 = counts[1][0] + counts[1][1];
  if (n0 == 0 || n1 == 0) return 0.0;

  // 1 - sum_child (n_c/n) G(child) / G(parent) with G(p) = 2p(1-p), over a
  // common integer denominator so the single division is correctly rounded.
  using Wide = __int128;
  const Wide den = Wide(in) * out * n0 * n1;
  const Wide num = den - Wide(n) * (Wide(counts[0][1]) * counts[0][0] * n1 + Wide(counts[1][1]) * counts[1][0] * n0);
  return std::clamp(static_cast<double>(num) / static_cast<double>(den), 0.0, 1.0);
}

RowMatrixXd project_items(const RowMatrixXd& rows, std::uint64_t seed, double perplexity) {
  TsneOptions<double> opts;
  opts.perplexity = perplexity;
  return tsne(rows, seed, opts);
}

SignatureMatrix build_signatures(const Dataset& d, const Predictor& model, const ThresholdPair& thresholds,
                                 std::optional<int> k_pos, std::optional<int> k_neg, std::uint64_t seed) {
  check_binary(d);
  const VectorXd scores = model.predict_batch(d.values());
  const ContrastSplit split =
      contrast_filter(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), thresholds);
  if (split.positives.empty())
    throw EmptySideError("no items scored >= tau_pos; lower the positive threshold");
  if (split.negatives.empty())
    throw EmptySideError("no items scored <= tau_neg; raise the negative threshold");

  SignatureMatrix sig;
  sig.thresholds = thresholds;
  sig.seed = seed;
  sig.clusters = cluster_side(d, split.positives, k_pos, seed, Side::kPositive);
  sig.k_pos = static_cast<int>(sig.clusters.size());
  auto negatives = cluster_side(d, split.negatives, k_neg, seed, Side::kNegative);
  sig.k_neg = static_cast<int>(negatives.size());
  sig.clusters.insert(sig.clusters.end(), std::make_move_iterator(negatives.begin()),
                      std::make_move_iterator(negatives.end()));

  const auto n_clusters = static_cast<Index>(sig.clusters.size());
  sig.discriminativeness.resize(n_clusters, d.n_features());
  parallel_for(static_cast<std::size_t>(n_clusters * d.n_features()), [&](std::size_t cell) {
    const auto c = static_cast<Index>(cell) / d.n_features();
    const auto f = static_cast<Index>(cell) % d.n_features();
    sig.discriminativeness(c, f) = rank_discriminative(d, sig.clusters, f, static_cast<std::size_t>(c));
  });

  sig.projected_items = split.positives;
  sig.projected_items.insert(sig.projected_items.end(), split.negatives.begin(), split.negatives.end());
  sig.projection = project_items(gather_rows(d, sig.projected_items), seed);
  return sig;
}

}  // namespace glassbox
