#pragma once

#include "glassbox/common.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace glassbox {

template <typename Scalar>
struct KMeansResult {
  std::vector<int> assignment;
  RowMatrix<Scalar> centroids;
  /// Sum of squared distances to the assigned centroids, recorded after every
  /// assignment step. Non-increasing.
  std::vector<Scalar> objective;
  int iterations = 0;
};

/// Squared Euclidean distances between every row of a and every row of b.
template <typename DerivedA, typename DerivedB>
RowMatrix<typename DerivedA::Scalar> squared_distances(const Eigen::MatrixBase<DerivedA>& a,
                                                       const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  RowMatrix<Scalar> out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) out(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return out;
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Assignment ties go to the lower cluster id. Stops when assignments are
/// stable or after max_iterations. A cluster that loses all its members is
/// reseeded with the point farthest from its own centroid.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& points, int k,
                                              std::uint64_t seed, int max_iterations = 100) {
  using Scalar = typename Derived::Scalar;
  const Index n = points.rows();
  const Index dim = points.cols();
  if (k < 1 || k > n) throw InputError("k must be in [1, number of points]");

  std::mt19937_64 rng(seed);
  KMeansResult<Scalar> result;
  result.centroids.resize(k, dim);

  // k-means++ seeding.
  std::vector<Scalar> nearest(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
  auto first = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
  result.centroids.row(0) = points.row(std::min(first, n - 1));
  for (int c = 1; c < k; ++c) {
    Scalar total = 0;
    for (Index i = 0; i < n; ++i) {
      const Scalar d = (points.row(i) - result.centroids.row(c - 1)).squaredNorm();
      nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], d);
      total += nearest[static_cast<std::size_t>(i)];
    }
    Index pick = n - 1;
    if (total > 0) {
      const Scalar target = static_cast<Scalar>(uniform01(rng)) * total;
      Scalar acc = 0;
      for (Index i = 0; i < n; ++i) {
        const Scalar w = nearest[static_cast<std::size_t>(i)];
        if (w <= 0) continue;
        acc += w;
        pick = i;
        if (acc > target) break;
      }
    } else {
      pick = std::min(static_cast<Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
    }
    result.centroids.row(c) = points.row(pick);
  }

  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<Scalar> own_distance(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    Scalar objective = 0;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      Scalar best_d = (points.row(i) - result.centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const Scalar d = (points.row(i) - result.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[static_cast<std::size_t>(i)] != best) changed = true;
      assignment[static_cast<std::size_t>(i)] = best;
      own_distance[static_cast<std::size_t>(i)] = best_d;
      objective += best_d;
    }
    result.objective.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) break;

    RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(k, dim);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.centroids.row(c) = sums.row(c) / static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || own_distance[static_cast<std::size_t>(i)] > own_distance[static_cast<std::size_t>(far)])
          far = i;
      }
      if (far < 0) far = 0;
      taken[static_cast<std::size_t>(far)] = true;
      result.centroids.row(c) = points.row(far);
    }
  }
  result.assignment = std::move(assignment);
  return result;
}

/// Mean silhouette under a precomputed distance matrix. Points in singleton
/// clusters score 0, as does any point whose a and b are both zero.
template <typename Derived>
typename Derived::Scalar mean_silhouette(const Eigen::MatrixBase<Derived>& distances,
                                         const std::vector<int>& assignment, int k) {
  using Scalar = typename Derived::Scalar;
  const Index n = distances.rows();
  if (k <= 1 || n == 0) return Scalar(0);
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  Scalar total = 0;
  std::vector<Scalar> sums(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), Scalar(0));
    for (Index j = 0; j < n; ++j)
      if (j != i) sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] += distances(i, j);
    const int own = assignment[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] <= 1) continue;
    const Scalar a = sums[static_cast<std::size_t>(own)] / static_cast<Scalar>(sizes[static_cast<std::size_t>(own)] - 1);
    Scalar b = std::numeric_limits<Scalar>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && sizes[static_cast<std::size_t>(c)] > 0)
        b = std::min(b, sums[static_cast<std::size_t>(c)] / static_cast<Scalar>(sizes[static_cast<std::size_t>(c)]));
    if (!std::isfinite(b)) continue;
    const Scalar denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<Scalar>(n);
}

}  // namespace glassbox
