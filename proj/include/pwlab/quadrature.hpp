#pragma once

// 1D quadrature helpers: adaptive Simpson for closed-form integrands and
// trapezoid rules (plain and cumulative) for sampled data.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pwlab/common.hpp"

namespace pwlab {

namespace detail {

template <class F, class T>
T adaptive_simpson_rec(const F& f, double a, double b, T fa, T fm, T fb, T whole,
                       double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  T flm = f(lm);
  T frm = f(rm);
  T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  T delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
auto adaptive_simpson(const F& f, double a, double b, double tol = 1e-9,
                      int max_depth = 40) -> decltype(f(a)) {
  using T = decltype(f(a));
  if (a == b) return T{};
  T fa = f(a);
  T fb = f(b);
  double m = 0.5 * (a + b);
  T fm = f(m);
  T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

template <class T>
T trapezoid(std::span<const T> values, double dx) {
  if (values.size() < 2) return T{};
  std::vector<T> terms(values.size());
  terms[0] = 0.5 * values[0];
  for (std::size_t i = 1; i + 1 < values.size(); ++i) terms[i] = values[i];
  terms[values.size() - 1] = 0.5 * values[values.size() - 1];
  return dx * pairwise_sum(std::span<const T>(terms.data(), terms.size()));
}

// out[k] = integral from x0 to x0 + k*dx of the piecewise-linear interpolant.
template <class T>
void cumulative_trapezoid(std::span<const T> values, double dx, std::vector<T>& out) {
  out.resize(values.size());
  if (values.empty()) return;
  out[0] = T{};
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
  }
}

// Fourth-order cumulative integration on a uniform lattice: each subinterval
// integrates the parabola through its three nearest samples.
template <class T>
inline void cumulative_simpson(std::span<const T> f, double dx, std::span<T> out) {
  const std::size_t k = f.size();
  if (out.size() != k) throw error("cumulative_simpson size mismatch");
  if (k == 0) return;
  out[0] = T{};
  if (k == 1) return;
  if (k == 2) {
    out[1] = out[0] + (dx / 2.0) * (f[0] + f[1]);
    return;
  }
  for (std::size_t j = 1; j + 1 < k; ++j)
    out[j] = out[j - 1] + (dx / 12.0) * (5.0 * f[j - 1] + 8.0 * f[j] - f[j + 1]);
  out[k - 1] = out[k - 2] + (dx / 12.0) * (-f[k - 3] + 8.0 * f[k - 2] + 5.0 * f[k - 1]);
}

}  // namespace pwlab
