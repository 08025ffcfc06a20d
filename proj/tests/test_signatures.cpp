#include "glassbox/signatures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "glassbox/export.hpp"
#include "glassbox/kmeans.hpp"

namespace glassbox {
namespace {

Dataset binary_rows(const std::vector<std::vector<int>>& rows, std::vector<int> labels = {}) {
  const auto n = static_cast<Index>(rows.size());
  const auto nf = static_cast<Index>(rows[0].size());
  RowMatrixXd x(n, nf);
  for (Index i = 0; i < n; ++i)
    for (Index f = 0; f < nf; ++f) x(i, f) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
  if (labels.empty()) labels.assign(rows.size(), 0);
  return Dataset::FromDense(x, labels, std::vector<FeatureKind>(static_cast<std::size_t>(nf), FeatureKind::kBinary));
}

std::vector<Index> all_rows(const Dataset& d) {
  std::vector<Index> out(static_cast<std::size_t>(d.n_rows()));
  for (Index i = 0; i < d.n_rows(); ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

// Impurity decrease for membership in `in_cluster`, computed directly.
double gini_oracle(const std::vector<int>& x, const std::vector<bool>& member) {
  auto g = [](double pos, double n) { return n == 0 ? 0.0 : 2 * (pos / n) * (1 - pos / n); };
  double n = 0, in = 0, n1 = 0, in1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n += 1;
    in += member[i];
    n1 += x[i];
    in1 += member[i] && x[i] == 1;
  }
  const double parent = g(in, n);
  if (parent == 0) return 0;
  const double children = n1 / n * g(in1, n1) + (n - n1) / n * g(in - in1, n - n1);
  return (parent - children) / parent;
}

TEST(Contrast, Examples) {
  const std::vector<double> s = {0.9, 0.5, 0.1, 0.7, 0.3};
  const ContrastSplit a = contrast_filter(s, {0.7, 0.3});
  EXPECT_EQ(a.positives, (std::vector<Index>{0, 3}));
  EXPECT_EQ(a.negatives, (std::vector<Index>{2, 4}));
  const ContrastSplit b = contrast_filter(s, {0.5, 0.5});
  EXPECT_EQ(b.positives, (std::vector<Index>{0, 1, 3}));
  EXPECT_EQ(b.negatives, (std::vector<Index>{2, 4}));
  EXPECT_THROW(contrast_filter(s, {0.3, 0.7}), InputError);
}

TEST(ContrastProperty, PartitionsWithoutOverlap) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(1 + rng() % 50);
    for (double& v : s) v = std::floor(uniform01(rng) * 10) / 10;
    double lo = std::floor(uniform01(rng) * 10) / 10, hi = std::floor(uniform01(rng) * 10) / 10;
    if (lo > hi) std::swap(lo, hi);
    const ContrastSplit split = contrast_filter(s, {hi, lo});
    std::set<Index> seen;
    for (Index i : split.positives) {
      EXPECT_GE(s[static_cast<std::size_t>(i)], hi);
      EXPECT_TRUE(seen.insert(i).second);
    }
    for (Index i : split.negatives) {
      EXPECT_LE(s[static_cast<std::size_t>(i)], lo);
      EXPECT_TRUE(seen.insert(i).second);
    }
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!seen.count(static_cast<Index>(i))) EXPECT_TRUE(s[i] < hi && s[i] > lo);
  }
}

TEST(Cluster, SingleClusterPresence) {
  const Dataset d = binary_rows({{1, 0, 1}, {1, 1, 0}, {0, 1, 1}, {0, 0, 0}}, {1, 1, 0, 0});
  const std::vector<Index> idx = {0, 1, 2};
  const auto clusters = cluster_side(d, idx, 1, 42);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members, idx);
  for (double p : clusters[0].presence) EXPECT_DOUBLE_EQ(p, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(clusters[0].absence(0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(clusters[0].label_mix, 2.0 / 3.0);
}

TEST(Cluster, SeparatesDuplicateGroups) {
  const Dataset d = binary_rows({{1, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}});
  const auto idx = all_rows(d);
  for (std::optional<int> k : {std::optional<int>(2), std::optional<int>()}) {
    const auto clusters = cluster_side(d, idx, k, 3);
    ASSERT_EQ(clusters.size(), 2u);
    std::set<std::vector<Index>> groups = {clusters[0].members, clusters[1].members};
    EXPECT_EQ(groups, (std::set<std::vector<Index>>{{0, 2, 4}, {1, 3, 5}}));
  }
}

TEST(Cluster, IdenticalRowsPickOneCluster) {
  const Dataset d = binary_rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}});
  const auto clusters = cluster_side(d, all_rows(d), std::nullopt, 5);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members.size(), 4u);
}

TEST(Cluster, RejectsBadInput) {
  RowMatrixXd x(2, 1);
  x << 0.5, 1;
  const Dataset numeric = Dataset::FromDense(x, {0, 1});
  const std::vector<Index> idx = {0, 1};
  try {
    cluster_side(numeric, idx, 1, 1);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("binarize"), std::string::npos);
  }
  const Dataset d = binary_rows({{1}, {0}});
  EXPECT_THROW(cluster_side(d, idx, 3, 1), InputError);
  EXPECT_THROW(cluster_side(d, idx, 0, 1), InputError);
  EXPECT_THROW(cluster_side(d, std::vector<Index>{}, 1, 1), InputError);
}

TEST(KMeansProperty, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 5 + static_cast<Index>(rng() % 60);
    RowMatrixXd pts(n, 4);
    for (Index i = 0; i < n; ++i)
      for (Index f = 0; f < 4; ++f) pts(i, f) = trial % 2 ? static_cast<double>(rng() % 2) : uniform01(rng);
    const int k = 1 + static_cast<int>(rng() % std::min<Index>(n, 8));
    const auto r = kmeans(pts, k, rng());
    for (std::size_t t = 1; t < r.objective.size(); ++t) EXPECT_LE(r.objective[t], r.objective[t - 1] + 1e-12);
    for (int a : r.assignment) {
      EXPECT_GE(a, 0);
      EXPECT_LT(a, k);
    }
    EXPECT_LE(r.iterations, 100);
  }
}

TEST(Gini, HandFixtures) {
  // Feature 0 splits {in: 1,1 | out: 1,0}; feature 1 separates perfectly;
  // feature 2 is uninformative.
  const Dataset d = binary_rows({{1, 1, 1}, {1, 1, 0}, {1, 0, 1}, {0, 0, 0}});
  std::vector<Cluster> clusters(2);
  clusters[0].members = {0, 1};
  clusters[1].members = {2, 3};
  EXPECT_EQ(rank_discriminative(d, clusters, 0, 0), 1.0 / 3.0);
  EXPECT_EQ(rank_discriminative(d, clusters, 1, 0), 1.0);
  EXPECT_EQ(rank_discriminative(d, clusters, 2, 0), 0.0);
  EXPECT_EQ(rank_discriminative(d, clusters, 0, 1), 1.0 / 3.0);
  EXPECT_THROW(rank_discriminative(d, clusters, 0, 2), InputError);
  std::vector<Cluster> single(1);
  single[0].members = {0, 1, 2, 3};
  EXPECT_EQ(rank_discriminative(d, single, 1, 0), 0.0);
}

TEST(GiniProperty, MatchesOracleAndIgnoresClusterOrder) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 40);
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n), std::vector<int>(3));
    for (auto& r : rows)
      for (int& v : r) v = static_cast<int>(rng() % 2);
    const Dataset d = binary_rows(rows);
    const int k = 2 + static_cast<int>(rng() % 3);
    std::vector<Cluster> clusters(static_cast<std::size_t>(k));
    std::vector<int> owner(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      owner[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
      clusters[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])].members.push_back(i);
    }
    std::vector<Cluster> reversed(clusters.rbegin(), clusters.rend());
    for (int c = 0; c < k; ++c)
      for (Index f = 0; f < 3; ++f) {
        std::vector<int> x;
        std::vector<bool> member;
        for (int i = 0; i < n; ++i) {
          x.push_back(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]);
          member.push_back(owner[static_cast<std::size_t>(i)] == c);
        }
        const double got = rank_discriminative(d, clusters, f, static_cast<std::size_t>(c));
        EXPECT_NEAR(got, gini_oracle(x, member), 1e-12);
        EXPECT_GE(got, 0.0);
        EXPECT_LE(got, 1.0);
        EXPECT_EQ(got, rank_discriminative(d, reversed, f, static_cast<std::size_t>(k - 1 - c)));
      }
  }
}

TEST(Signatures, RecoversTwoCauses) {
  const auto tc = testing::two_cause_data(11);
  const LogisticModel model = train_logistic(tc.data, 0.5, 2000);
  const SignatureMatrix sig = build_signatures(tc.data, model, {0.6, 0.4}, std::nullopt, std::nullopt, 42);
  ASSERT_EQ(sig.k_pos, 2);
  ASSERT_GE(sig.k_neg, 1);
  EXPECT_EQ(sig.discriminativeness.rows(), sig.k_pos + sig.k_neg);
  EXPECT_EQ(sig.projection.rows(), static_cast<Index>(sig.projected_items.size()));
  std::set<std::set<Index>> tops;
  for (int c = 0; c < sig.k_pos; ++c) {
    EXPECT_EQ(sig.clusters[static_cast<std::size_t>(c)].side, Side::kPositive);
    std::vector<Index> order(static_cast<std::size_t>(tc.data.n_features()));
    for (Index f = 0; f < tc.data.n_features(); ++f) order[static_cast<std::size_t>(f)] = f;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return sig.discriminativeness(c, a) > sig.discriminativeness(c, b); });
    tops.insert({order[0], order[1]});
  }
  EXPECT_EQ(tops, (std::set<std::set<Index>>{{0, 1}, {2, 3}}));
}

TEST(Signatures, EmptySideIsReported) {
  const auto tc = testing::two_cause_data(12, 20, 40);
  const ConstantModel low(tc.data.n_features(), 0.2);
  try {
    build_signatures(tc.data, low, {0.6, 0.4}, 1, 1, 1);
    FAIL();
  } catch (const EmptySideError& e) {
    EXPECT_NE(std::string(e.what()).find("tau_pos"), std::string::npos);
  }
  const ConstantModel high(tc.data.n_features(), 0.8);
  EXPECT_THROW(build_signatures(tc.data, high, {0.6, 0.4}, 1, 1, 1), EmptySideError);
}

TEST(Signatures, DeterministicForSeed) {
  const auto tc = testing::two_cause_data(13, 30, 60);
  const LogisticModel model = train_logistic(tc.data, 0.5, 500);
  const auto a = signatures_to_json(build_signatures(tc.data, model, {0.6, 0.4}, std::nullopt, 2, 9)).dump();
  const auto b = signatures_to_json(build_signatures(tc.data, model, {0.6, 0.4}, std::nullopt, 2, 9)).dump();
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace glassbox
