#pragma once

// Directions, the (y, z = x.omega) frame, the space-time regions used to
// split boundary data, uniform simulation grids, and boundary sampling.

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "pwlab/common.hpp"

namespace pwlab {

class Direction {
 public:
  explicit Direction(Vec v) : v_(std::move(v)) {
    if (v_.size() < 1 || v_.size() > 3) throw error("not a direction");
    if (std::abs(v_.norm() - 1.0) > 1e-12) throw error("not a direction");
  }

  static Direction normalized(Vec v) {
    double n = v.norm();
    if (!(n > 0.0)) throw error("not a direction");
    return Direction(Vec(v / n));
  }

  int n() const { return static_cast<int>(v_.size()); }
  const Vec& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }

 private:
  Vec v_;
};

// Orthonormal frame {e_1 .. e_n} with the last axis aligned to omega, so the
// frame coordinates of x are (y, z) with z = x.omega.
struct Frame {
  Direction omega;
  MatR basis;  // columns e_1..e_n, last column = omega

  int n() const { return omega.n(); }
  double z(const Vec& x) const { return omega.vec().dot(x); }
  Vec y(const Vec& x) const {
    int d = n();
    Vec out(std::max(d - 1, 0));
    for (int k = 0; k + 1 < d; ++k) out[k] = basis.col(k).dot(x);
    return out;
  }
  Vec coords(const Vec& x) const {  // (y_1..y_{n-1}, z)
    int d = n();
    Vec out(d);
    for (int k = 0; k < d; ++k) out[k] = basis.col(k).dot(x);
    return out;
  }
};

// Deterministic Gram-Schmidt against the canonical basis, accepting seed
// vectors in index order (smallest index first) until n-1 survive; omega is
// placed last.
inline Frame make_frame(const Direction& omega) {
  int d = omega.n();
  MatR basis(d, d);
  basis.col(d - 1) = omega.vec();
  int filled = 0;
  for (int seed = 0; seed < d && filled < d - 1; ++seed) {
    Vec v = Vec::Zero(d);
    v[seed] = 1.0;
    v -= omega.vec() * omega.vec().dot(v);
    for (int k = 0; k < filled; ++k) v -= basis.col(k) * basis.col(k).dot(v);
    double norm = v.norm();
    if (norm > 1e-6) {
      basis.col(filled++) = v / norm;
    }
  }
  if (filled != d - 1) throw error("frame construction failed");
  return Frame{omega, basis};
}

enum class RegionKind { Q, Qplus, Qminus, Sigma, SigmaPlus, SigmaMinus, Gamma, GammaTopBottom };

struct Region {
  RegionKind kind = RegionKind::Q;
  double T = 7.5;              // time horizon of Q = B x (-T, T)
  double tol_surface = 1e-9;   // thickness given to measure-zero surfaces
};

inline bool region_contains(const Region& region, const Frame& frame, const Vec& x,
                            double t) {
  double r = x.norm();
  double z = frame.z(x);
  double tol = region.tol_surface;
  bool in_ball = r < 1.0;
  bool in_time = std::abs(t) < region.T;
  switch (region.kind) {
    case RegionKind::Q:
      return in_ball && in_time;
    case RegionKind::Qplus:
      return in_ball && in_time && (t - z > 0.0);
    case RegionKind::Qminus:
      return in_ball && in_time && (t - z < 0.0);
    case RegionKind::Sigma:
      return std::abs(r - 1.0) <= tol && in_time;
    case RegionKind::SigmaPlus:
      return std::abs(r - 1.0) <= tol && in_time && (t - z > 0.0);
    case RegionKind::SigmaMinus:
      return std::abs(r - 1.0) <= tol && in_time && (t - z < 0.0);
    case RegionKind::Gamma:
      return r <= 1.0 + tol && std::abs(t) <= region.T + tol && std::abs(t - z) <= tol;
    case RegionKind::GammaTopBottom:
      return r <= 1.0 + tol && std::abs(std::abs(t) - region.T) <= tol;
  }
  return false;
}

// Uniform cube grid [-L, L]^n with leapfrog time stepping over [t0, t1].
// CFL (dt <= h/sqrt(n)) and the causal-disconnection bound on L are enforced
// here so downstream code never has to re-check them.
struct SimGrid {
  int n = 2;
  double h = 1.0 / 64.0;
  double extent = 5.0;  // snapped up to a multiple of h at construction
  double dt = 0.0;
  double t0 = 0.0;
  double t1 = 3.0;

  SimGrid() = default;
  SimGrid(int n_, double h_, double extent_, double t0_, double t1_, double dt_ = 0.0)
      : n(n_), h(h_), t0(t0_), t1(t1_) {
    if (n < 1 || n > 3) throw error("grid dimension must be 1, 2, or 3");
    if (!(h > 0.0)) throw error("grid spacing must be positive");
    long cells = std::lround(std::ceil(extent_ / h - 1e-12));
    extent = static_cast<double>(cells) * h;
    dt = dt_ > 0.0 ? dt_ : 0.9 * h / std::sqrt(static_cast<double>(n));
    if (dt > h / std::sqrt(static_cast<double>(n)) + 1e-15) {
      throw error("CFL violated: dt must satisfy dt <= h/sqrt(n)");
    }
    if (extent < 1.0 + (t1 + 1.0) - 1e-12) {
      throw error("grid extent too small for causal disconnection over [t0, t1]");
    }
    if (!(t1 > t0)) throw error("empty time window");
  }

  int points_per_axis() const {
    return static_cast<int>(std::lround(2.0 * extent / h)) + 1;
  }
  std::size_t point_count() const {
    std::size_t m = static_cast<std::size_t>(points_per_axis());
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= m;
    return total;
  }
  int step_count() const {
    return static_cast<int>(std::lround(std::ceil((t1 - t0) / dt - 1e-9)));
  }
  double coord(int i) const { return -extent + i * h; }
  Vec point(const std::vector<int>& idx) const {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = coord(idx[static_cast<std::size_t>(d)]);
    return x;
  }
};

// Uniform samples of the unit sphere. n=2: ceil(2*pi/h_angular) points from
// angle 0; n=1: the 0-sphere {+1, -1}; n=3: a deterministic Fibonacci
// lattice with count matching the requested angular resolution.
struct BoundaryPoint {
  Vec x;
  double angle1 = 0.0;
  double angle2 = 0.0;
};

inline std::vector<BoundaryPoint> sample_boundary_circle(int n, double h_angular) {
  if (!(h_angular > 0.0)) throw error("angular spacing must be positive");
  std::vector<BoundaryPoint> pts;
  if (n == 1) {
    pts.push_back({make_vec({1.0}), 0.0, 0.0});
    pts.push_back({make_vec({-1.0}), std::numbers::pi, 0.0});
    return pts;
  }
  if (n == 2) {
    int m = static_cast<int>(std::ceil(2.0 * std::numbers::pi / h_angular - 1e-12));
    pts.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      double a = 2.0 * std::numbers::pi * k / m;
      pts.push_back({make_vec({std::cos(a), std::sin(a)}), a, 0.0});
    }
    return pts;
  }
  if (n == 3) {
    int m = static_cast<int>(
        std::ceil(4.0 * std::numbers::pi / (h_angular * h_angular) - 1e-12));
    m = std::max(m, 6);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    pts.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      double zc = 1.0 - 2.0 * (k + 0.5) / m;
      double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double a = golden * k;
      Vec x = make_vec({rho * std::cos(a), rho * std::sin(a), zc});
      pts.push_back({x, std::atan2(x[1], x[0]), std::acos(zc)});
    }
    return pts;
  }
  throw error("boundary sampling supports n in {1,2,3}");
}

}  // namespace pwlab
