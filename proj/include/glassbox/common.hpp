#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace glassbox {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrix<double>;
using Eigen::Index;
using Eigen::VectorXd;

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input or violated precondition: malformed files, unknown names,
/// out-of-range arguments. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length of the input, so results are independent of worker scheduling.
template <typename Scalar>
Scalar pairwise_sum(const Scalar* data, std::size_t n) {
  if (n <= 8) {
    Scalar s = 0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename Derived>
typename Derived::Scalar pairwise_mean(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> tmp = v;
  if (tmp.size() == 0) return Scalar(0);
  return pairwise_sum(tmp.data(), static_cast<std::size_t>(tmp.size())) /
         static_cast<Scalar>(tmp.size());
}

/// Runs body(i) for i in [0, n) across hardware threads in contiguous chunks.
/// Callers write to disjoint slots, so output never depends on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         std::size_t min_chunk = 256) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, (n + min_chunk - 1) / std::max<std::size_t>(1, min_chunk));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
/// Unlike std::uniform_real_distribution this is bit-identical across
/// standard library implementations.
template <typename Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace glassbox
