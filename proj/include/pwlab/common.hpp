#pragma once

// Shared primitives: small fixed-capacity vectors, error type, deterministic
// reductions, and the thread-count knob used by every parallel region.

#include <Eigen/Core>
#include <atomic>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pwlab {

using cplx = std::complex<double>;

// Dimension is runtime (n in {1,2,3}) but tiny; cap storage at 4 so these
// never touch the heap.
using Vec  = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using VecC = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
using MatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

namespace detail {
inline std::atomic<int>& thread_count_slot() {
  static std::atomic<int> n{0};  // 0 = auto
  return n;
}
}  // namespace detail

inline void set_max_threads(int k) { detail::thread_count_slot().store(k); }

inline int max_threads() {
  int k = detail::thread_count_slot().load();
  if (k > 0) return k;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition; each worker owns a contiguous index range, so
// writes are disjoint and the result is independent of the thread count.
template <class F>
void parallel_for(std::size_t count, F&& body) {
  int k = max_threads();
  if (k <= 1 || count < 2048) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(k), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = count * w / workers;
    std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Same partition, but the worker receives its whole [lo, hi) range. Useful
// when per-block state (scratch buffers, local flags) amortizes better than
// per-index calls.
template <class F>
void parallel_for_blocks(std::size_t count, F&& body) {
  int k = max_threads();
  if (k <= 1 || count < 64) {
    body(std::size_t{0}, count);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(k), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = count * w / workers;
    std::size_t hi = count * (w + 1) / workers;
    pool.emplace_back([lo, hi, &body] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

// Fixed-order pairwise summation. Always the same association order for a
// given length, regardless of threading, so reductions are bit-reproducible.
template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 32) {
    T acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc += xs[i];
    return acc;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs.data(), xs.size()));
}

// FNV-1a, used for provenance hashes in metadata sidecars.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace pwlab
