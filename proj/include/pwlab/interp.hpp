#pragma once

// Tensor-product cubic Lagrange interpolation on uniform grids (third-order
// or better); shared by boundary-trace extraction and the expansion engine.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/geometry.hpp"

namespace pwlab {

struct GridLayout {
  int n = 2;
  int m = 0;      // points per axis
  double h = 0.0;
  double L = 0.0;

  static GridLayout of(const SimGrid& g) {
    return {g.n, g.points_per_axis(), g.h, g.extent};
  }
  std::size_t size() const {
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(m);
    return total;
  }
  // axis 0 fastest
  std::size_t flat(const std::array<int, 3>& idx) const {
    std::size_t out = 0;
    for (int d = n - 1; d >= 0; --d)
      out = out * static_cast<std::size_t>(m) + static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
    return out;
  }
  std::array<int, 3> unflat(std::size_t k) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < n; ++d) {
      idx[static_cast<std::size_t>(d)] = static_cast<int>(k % static_cast<std::size_t>(m));
      k /= static_cast<std::size_t>(m);
    }
    return idx;
  }
  double coord(int i) const { return -L + i * h; }
  Vec point(const std::array<int, 3>& idx) const {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = coord(idx[static_cast<std::size_t>(d)]);
    return x;
  }
};

namespace detail {
inline std::array<double, 4> cubic_weights(double s) {
  // Lagrange basis on offsets {-1, 0, 1, 2} evaluated at s in [0, 1].
  return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
          -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
}
}  // namespace detail

// Precomputed stencil: 4^n grid indices and weights for one target point.
struct CubicStencil {
  std::array<int, 3> base{0, 0, 0};
  std::array<std::array<double, 4>, 3> w{};
  int n = 2;

  static CubicStencil at(const GridLayout& g, const Vec& x) {
    CubicStencil st;
    st.n = g.n;
    for (int d = 0; d < g.n; ++d) {
      double rel = (x[d] + g.L) / g.h;
      int i0 = static_cast<int>(std::floor(rel));
      double s = rel - i0;
      if (i0 - 1 < 0 || i0 + 2 > g.m - 1) throw error("boundary outside grid");
      st.base[static_cast<std::size_t>(d)] = i0 - 1;
      st.w[static_cast<std::size_t>(d)] = detail::cubic_weights(s);
    }
    return st;
  }

  template <class T>
  T apply(const GridLayout& g, std::span<const T> values) const {
    T acc{};
    std::array<int, 3> idx{0, 0, 0};
    int c0 = n > 0 ? 4 : 1, c1 = n > 1 ? 4 : 1, c2 = n > 2 ? 4 : 1;
    for (int k2 = 0; k2 < c2; ++k2) {
      for (int k1 = 0; k1 < c1; ++k1) {
        for (int k0 = 0; k0 < c0; ++k0) {
          idx[0] = base[0] + k0;
          idx[1] = n > 1 ? base[1] + k1 : 0;
          idx[2] = n > 2 ? base[2] + k2 : 0;
          double wt = w[0][static_cast<std::size_t>(k0)];
          if (n > 1) wt *= w[1][static_cast<std::size_t>(k1)];
          if (n > 2) wt *= w[2][static_cast<std::size_t>(k2)];
          acc += wt * values[flat_of(g, idx)];
        }
      }
    }
    return acc;
  }

 private:
  static std::size_t flat_of(const GridLayout& g, const std::array<int, 3>& idx) {
    return g.flat(idx);
  }
};

template <class T>
T interpolate(const GridLayout& g, std::span<const T> values, const Vec& x) {
  return CubicStencil::at(g, x).apply(g, values);
}

}  // namespace pwlab
