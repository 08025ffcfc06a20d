#pragma once

#include "glassbox/common.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace glassbox {

template <typename Scalar = double>
struct TsneOptions {
  Scalar perplexity = 30;
  int iterations = 500;
  int exaggeration_iterations = 100;
  Scalar exaggeration = 4;
  Scalar learning_rate = 100;
  int momentum_switch = 250;
  Scalar initial_momentum = 0.5;
  Scalar final_momentum = 0.8;
  Scalar init_std = 1e-2;
  int bisection_steps = 50;
  Scalar tolerance = 1e-5;
};

/// Conditional affinities p_{j|i} with a per-row Gaussian bandwidth found by
/// bisection so that each row's entropy matches log(perplexity).
template <typename Scalar>
RowMatrix<Scalar> conditional_affinities(const RowMatrix<Scalar>& sq_dist, Scalar perplexity,
                                         int bisection_steps, Scalar tolerance) {
  const Index n = sq_dist.rows();
  RowMatrix<Scalar> p = RowMatrix<Scalar>::Zero(n, n);
  const Scalar log_u = std::log(perplexity);
  for (Index i = 0; i < n; ++i) {
    Scalar d_min = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < n; ++j)
      if (j != i) d_min = std::min(d_min, sq_dist(i, j));

    Scalar beta = 1;
    Scalar beta_lo = -std::numeric_limits<Scalar>::infinity();
    Scalar beta_hi = std::numeric_limits<Scalar>::infinity();
    for (int step = 0; step < bisection_steps; ++step) {
      Scalar sum_p = 0;
      Scalar sum_dp = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        // Shifting by the row minimum keeps sum_p > 0 for large beta.
        const Scalar shifted = sq_dist(i, j) - d_min;
        const Scalar pj = std::exp(-shifted * beta);
        p(i, j) = pj;
        sum_p += pj;
        sum_dp += shifted * pj;
      }
      const Scalar entropy = std::log(sum_p) + beta * sum_dp / sum_p;
      const Scalar diff = entropy - log_u;
      if (std::abs(diff) < tolerance) break;
      if (diff > 0) {
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2 : (beta + beta_hi) / 2;
      } else {
        beta_hi = beta;
        beta = std::isinf(beta_lo) ? beta / 2 : (beta + beta_lo) / 2;
      }
    }
    const Scalar row_sum = p.row(i).sum();
    if (row_sum > 0) p.row(i) /= row_sum;
  }
  return p;
}

/// Exact t-SNE into two dimensions. Deterministic for a fixed seed:
/// initialization draws come from std::mt19937_64 through Box-Muller and all
/// reductions run in a fixed order.
template <typename Derived>
RowMatrix<typename Derived::Scalar> tsne(const Eigen::MatrixBase<Derived>& points, std::uint64_t seed,
                                         TsneOptions<typename Derived::Scalar> opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Index n = points.rows();
  RowMatrix<Scalar> y = RowMatrix<Scalar>::Zero(n, 2);
  if (n <= 1) return y;

  const Scalar max_perplexity = static_cast<Scalar>(n - 1) / 3;
  const Scalar perplexity = std::min(opts.perplexity, max_perplexity);

  RowMatrix<Scalar> sq_dist(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) sq_dist(i, j) = (points.row(i) - points.row(j)).squaredNorm();

  RowMatrix<Scalar> p = conditional_affinities<Scalar>(sq_dist, perplexity, opts.bisection_steps, opts.tolerance);
  p = (p + p.transpose()).eval();
  p /= p.sum();
  p = p.cwiseMax(Scalar(1e-12));
  p.diagonal().setZero();

  std::mt19937_64 rng(seed);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (Index i = 0; i < n; ++i) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    y(i, 0) = static_cast<Scalar>(r * std::cos(kTwoPi * u2)) * opts.init_std;
    y(i, 1) = static_cast<Scalar>(r * std::sin(kTwoPi * u2)) * opts.init_std;
  }

  RowMatrix<Scalar> velocity = RowMatrix<Scalar>::Zero(n, 2);
  RowMatrix<Scalar> num(n, n);
  RowMatrix<Scalar> grad(n, 2);
  for (int iter = 0; iter < opts.iterations; ++iter) {
    const Scalar exaggeration = iter < opts.exaggeration_iterations ? opts.exaggeration : Scalar(1);
    const Scalar momentum = iter < opts.momentum_switch ? opts.initial_momentum : opts.final_momentum;

    Scalar num_sum = 0;
    for (Index i = 0; i < n; ++i) {
      num(i, i) = 0;
      for (Index j = i + 1; j < n; ++j) {
        const Scalar v = Scalar(1) / (Scalar(1) + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = v;
        num(j, i) = v;
        num_sum += 2 * v;
      }
    }
    for (Index i = 0; i < n; ++i) {
      Scalar gx = 0;
      Scalar gy = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const Scalar q = std::max(num(i, j) / num_sum, Scalar(1e-12));
        const Scalar mult = (exaggeration * p(i, j) - q) * num(i, j);
        gx += mult * (y(i, 0) - y(j, 0));
        gy += mult * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4 * gx;
      grad(i, 1) = 4 * gy;
    }
    velocity = momentum * velocity - opts.learning_rate * grad;
    y += velocity;
    const Eigen::Matrix<Scalar, 1, 2> mean = y.colwise().mean();
    y.rowwise() -= mean;
  }
  return y;
}

}  // namespace glassbox
