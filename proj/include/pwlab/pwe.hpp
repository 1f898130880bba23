#pragma once

// Progressing-wave expansion engine: phase integral psi along incoming rays,
// leading amplitude, and transport recursion for higher coefficients.
//
// Conventions, with z = omega.x and plain truncated powers (t-z)^j_+:
//   delta wave:     a_{-1} = e^psi, then a_q for q >= 0
//   heaviside wave: a_{-1} = 0, a_0 = e^psi, then a_q for q >= 1
// Each order solves 2*max(q,1) (d_omega - omega.W) a_q = -L a_{q-1}, so
//   a_q(x) = -(1 / (2 max(q,1))) e^{psi(x)} int_{-inf}^0 e^{-psi} (L a_{q-1})(x + s omega) ds.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/csv.hpp"
#include "pwlab/fields.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/interp.hpp"
#include "pwlab/mollifier.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

using WaveKind = IncidentKind;

// Spatial-only grids for expansion tables still carry the SimGrid time window
// invariant; park the window in the past where it is vacuous.
inline SimGrid make_table_grid(int n, double h, double extent) {
  double t1 = extent - 2.0;
  return SimGrid(n, h, extent, t1 - 1.0, t1);
}

inline double ray_spacing(const SimGrid& grid, const FieldSpec& spec) {
  return std::min(grid.h / 2.0, spec.support_radius / 200.0);
}

namespace detail {

struct SweepResult {
  cplx psi{0.0, 0.0};
  cplx g_integral{0.0, 0.0};  // int_{-inf}^0 G(x + s omega) ds
};

// Cumulative integrals along the ray through x: psi and, when with_g is set,
// the source term G = -lap psi - (grad psi).(grad psi) + 2 W.grad psi + V.
inline SweepResult sweep_ray(const FieldSpec& spec, const Vec& omega, const Vec& x,
                             double spacing, bool with_g) {
  SweepResult res;
  const int n = spec.n;
  const double r = spec.support_radius;
  const double z = omega.dot(x);
  if (z + r <= 0.0) return res;
  Vec y = x - z * omega;
  if (y.squaredNorm() >= r * r) return res;

  const double len = z + r;
  const int k = std::max(2, static_cast<int>(std::ceil(len / spacing)));
  const double ds = len / k;
  const std::size_t m = static_cast<std::size_t>(k) + 1;

  std::vector<cplx> f_psi(m);
  std::vector<std::array<cplx, 3>> f_grad;
  std::vector<cplx> f_lap;
  std::vector<VecC> w_node;
  std::vector<cplx> v_node;
  if (with_g) {
    f_grad.resize(m);
    f_lap.resize(m);
    w_node.resize(m);
    v_node.resize(m);
  }

  Vec p(n);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = -len + static_cast<double>(j) * ds;
    p = x + s * omega;
    VecC w = spec.vector(p);
    cplx dw{0.0, 0.0};
    for (int d = 0; d < n; ++d) dw += omega[d] * w[d];
    f_psi[j] = dw;
    if (with_g) {
      MatC jac = spec.vector_jac(p);
      VecC lap = spec.vector_lap(p);
      for (int d = 0; d < n; ++d) {
        cplx gd{0.0, 0.0};
        for (int i = 0; i < n; ++i) gd += omega[i] * jac(i, d);
        f_grad[j][static_cast<std::size_t>(d)] = gd;
      }
      cplx lw{0.0, 0.0};
      for (int d = 0; d < n; ++d) lw += omega[d] * lap[d];
      f_lap[j] = lw;
      w_node[j] = w;
      v_node[j] = spec.scalar(p);
    }
  }

  std::vector<cplx> cum(m);
  cumulative_simpson<cplx>(f_psi, ds, cum);
  res.psi = cum[m - 1];
  if (!with_g) return res;

  std::vector<std::array<cplx, 3>> grad_c(m);
  {
    std::vector<cplx> comp(m), ccum(m);
    for (int d = 0; d < n; ++d) {
      for (std::size_t j = 0; j < m; ++j) comp[j] = f_grad[j][static_cast<std::size_t>(d)];
      cumulative_simpson<cplx>(comp, ds, ccum);
      for (std::size_t j = 0; j < m; ++j) grad_c[j][static_cast<std::size_t>(d)] = ccum[j];
    }
  }
  std::vector<cplx> lap_c(m);
  cumulative_simpson<cplx>(f_lap, ds, lap_c);

  std::vector<cplx> g(m);
  for (std::size_t j = 0; j < m; ++j) {
    cplx grad_sq{0.0, 0.0};
    cplx w_dot{0.0, 0.0};
    for (int d = 0; d < n; ++d) {
      const cplx gd = grad_c[j][static_cast<std::size_t>(d)];
      grad_sq += gd * gd;
      w_dot += w_node[j][d] * gd;
    }
    g[j] = -lap_c[j] - grad_sq + 2.0 * w_dot + v_node[j];
  }
  std::vector<cplx> gcum(m);
  cumulative_simpson<cplx>(g, ds, gcum);
  res.g_integral = gcum[m - 1];
  return res;
}

}  // namespace detail

inline std::vector<cplx> compute_psi(const FieldSpec& spec, const Direction& omega,
                                     const SimGrid& grid) {
  const GridLayout lay = GridLayout::of(grid);
  const double spacing = ray_spacing(grid, spec);
  std::vector<cplx> psi(lay.size());
  parallel_for_blocks(lay.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Vec x = lay.point(lay.unflat(i));
      psi[i] = detail::sweep_ray(spec, omega.vec(), x, spacing, false).psi;
    }
  });
  return psi;
}

inline std::vector<cplx> compute_F(const FieldSpec& spec, const Direction& omega,
                                   const SimGrid& grid, const std::vector<cplx>& psi) {
  const GridLayout lay = GridLayout::of(grid);
  if (psi.size() != lay.size()) throw error("psi table size mismatch");
  const double spacing = ray_spacing(grid, spec);
  std::vector<cplx> f(lay.size());
  parallel_for_blocks(lay.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Vec x = lay.point(lay.unflat(i));
      auto sw = detail::sweep_ray(spec, omega.vec(), x, spacing, true);
      f[i] = -0.5 * std::exp(psi[i]) * sw.g_integral;
    }
  });
  return f;
}

// Pointwise variants used as continuum references independent of any table.
inline cplx psi_at(const FieldSpec& spec, const Direction& omega, const Vec& x,
                   double spacing) {
  return detail::sweep_ray(spec, omega.vec(), x, spacing, false).psi;
}
inline cplx leading_amplitude_at(const FieldSpec& spec, const Direction& omega, const Vec& x,
                                 double spacing) {
  auto sw = detail::sweep_ray(spec, omega.vec(), x, spacing, true);
  return -0.5 * std::exp(sw.psi) * sw.g_integral;
}

// Discrete L = -lap + 2 W.grad + V applied to a sampled table (centered
// second-order stencils; the outermost ring copies its interior neighbor).
inline std::vector<cplx> apply_L_fd(const FieldSpec& spec, const SimGrid& grid,
                                    const std::vector<cplx>& a) {
  const GridLayout lay = GridLayout::of(grid);
  if (a.size() != lay.size()) throw error("table size mismatch");
  const int n = grid.n;
  const int m = lay.m;
  const double h = grid.h;
  std::vector<cplx> out(lay.size());
  parallel_for_blocks(lay.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::array<int, 3> cidx = lay.unflat(i);
      for (int d = 0; d < n; ++d) {
        auto& c = cidx[static_cast<std::size_t>(d)];
        c = std::clamp(c, 1, m - 2);
      }
      const std::size_t ic = lay.flat(cidx);
      Vec x = lay.point(cidx);
      VecC w = spec.vector(x);
      cplx v = spec.scalar(x);
      cplx lap{0.0, 0.0};
      cplx drift{0.0, 0.0};
      const cplx center = a[ic];
      for (int d = 0; d < n; ++d) {
        std::array<int, 3> up = cidx, dn = cidx;
        up[static_cast<std::size_t>(d)] += 1;
        dn[static_cast<std::size_t>(d)] -= 1;
        const cplx au = a[lay.flat(up)];
        const cplx ad = a[lay.flat(dn)];
        lap += (au - 2.0 * center + ad) / (h * h);
        drift += w[d] * (au - ad) / (2.0 * h);
      }
      out[i] = -lap + 2.0 * drift + v * center;
    }
  });
  return out;
}

struct ExpansionTable {
  Direction omega = Direction(make_vec({1.0}));
  WaveKind kind = WaveKind::Delta;
  int N = 0;
  SimGrid grid;
  std::vector<cplx> psi;
  // coeffs[j] holds order j-1, so coeffs[0] = a_{-1}, ..., coeffs[N+1] = a_N.
  std::vector<std::vector<cplx>> coeffs;

  const std::vector<cplx>& a(int order) const {
    if (order < -1 || order > N) throw error("expansion order out of range");
    return coeffs[static_cast<std::size_t>(order + 1)];
  }
};

namespace detail {

// a_q from a_{q-1} by integrating e^{-psi} L a_{q-1} along each ray.
inline std::vector<cplx> next_coeff(const FieldSpec& spec, const Direction& omega,
                                    const SimGrid& grid, const std::vector<cplx>& psi,
                                    const std::vector<cplx>& a_prev, int q) {
  const GridLayout lay = GridLayout::of(grid);
  const double spacing = ray_spacing(grid, spec);
  const double r = spec.support_radius;
  const double pad = 4.0 * grid.h;
  const double safe = grid.extent - 2.0 * grid.h - 1e-12;

  std::vector<cplx> la = apply_L_fd(spec, grid, a_prev);
  std::vector<cplx> integrand(lay.size());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = std::exp(-psi[i]) * la[i];

  const double factor = -1.0 / (2.0 * std::max(q, 1));
  std::vector<cplx> out(lay.size(), cplx{0.0, 0.0});
  parallel_for_blocks(lay.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<cplx> f;
    std::vector<cplx> cum;
    for (std::size_t i = lo; i < hi; ++i) {
      Vec x = lay.point(lay.unflat(i));
      const double z = omega.vec().dot(x);
      if (z + r <= 0.0) continue;
      Vec y = x - z * omega.vec();
      if (y.squaredNorm() >= (r + pad) * (r + pad)) continue;

      const double len = z + r;
      Vec tail = x - len * omega.vec();
      bool ok = true;
      for (int d = 0; d < spec.n; ++d)
        ok = ok && std::abs(x[d]) <= safe && std::abs(tail[d]) <= safe;
      if (!ok) continue;

      const int k = std::max(2, static_cast<int>(std::ceil(len / spacing)));
      const double ds = len / k;
      f.assign(static_cast<std::size_t>(k) + 1, cplx{});
      cum.assign(f.size(), cplx{});
      for (std::size_t j = 0; j < f.size(); ++j) {
        Vec p = x + (-len + static_cast<double>(j) * ds) * omega.vec();
        f[j] = interpolate<cplx>(lay, integrand, p);
      }
      cumulative_simpson<cplx>(f, ds, cum);
      out[i] = factor * std::exp(psi[i]) * cum.back();
    }
  });
  return out;
}

}  // namespace detail

inline ExpansionTable expand(const FieldSpec& spec, const Direction& omega,
                             const SimGrid& grid, int order, WaveKind kind) {
  if (order < 0 || order > 2) throw error("expansion order out of range");
  ExpansionTable t;
  t.omega = omega;
  t.kind = kind;
  t.N = order;
  t.grid = grid;
  t.psi = compute_psi(spec, omega, grid);
  t.coeffs.resize(static_cast<std::size_t>(order) + 2);

  const GridLayout lay = GridLayout::of(grid);
  std::vector<cplx> exp_psi(lay.size());
  for (std::size_t i = 0; i < exp_psi.size(); ++i) exp_psi[i] = std::exp(t.psi[i]);

  if (kind == WaveKind::Delta) {
    t.coeffs[0] = exp_psi;
    if (order >= 0) t.coeffs[1] = compute_F(spec, omega, grid, t.psi);
    for (int q = 1; q <= order; ++q)
      t.coeffs[static_cast<std::size_t>(q) + 1] =
          detail::next_coeff(spec, omega, grid, t.psi, t.coeffs[static_cast<std::size_t>(q)], q);
  } else {
    t.coeffs[0].assign(lay.size(), cplx{0.0, 0.0});
    t.coeffs[1] = exp_psi;
    if (order >= 1) t.coeffs[2] = compute_F(spec, omega, grid, t.psi);
    for (int q = 2; q <= order; ++q)
      t.coeffs[static_cast<std::size_t>(q) + 1] =
          detail::next_coeff(spec, omega, grid, t.psi, t.coeffs[static_cast<std::size_t>(q)], q);
  }
  return t;
}

inline cplx eval_coeff(const ExpansionTable& t, int order, const Vec& x) {
  const GridLayout lay = GridLayout::of(t.grid);
  return interpolate<cplx>(lay, t.a(order), x);
}

inline cplx eval_psi(const ExpansionTable& t, const Vec& x) {
  const GridLayout lay = GridLayout::of(t.grid);
  return interpolate<cplx>(lay, t.psi, x);
}

// Sup of the transport relation residual over sample points. For the seeded
// order (a_{-1} for delta, a_0 for heaviside) the relation is
// d_omega a = (omega.W) a; for later orders 2*max(q,1) d_omega-terms balance
// -L a_{q-1}. Directional derivatives use centered differences of step h.
inline double transport_residual(const ExpansionTable& t, const FieldSpec& spec, int order,
                                 const std::vector<Vec>& points) {
  const GridLayout lay = GridLayout::of(t.grid);
  const double h = t.grid.h;
  const bool seeded = (t.kind == WaveKind::Delta) ? (order == -1)
                                                  : (order == 0);
  std::vector<cplx> la;
  if (!seeded) la = apply_L_fd(spec, t.grid, t.a(order - 1));
  double sup = 0.0;
  for (const Vec& x : points) {
    Vec xp = x + h * t.omega.vec();
    Vec xm = x - h * t.omega.vec();
    cplx da = (interpolate<cplx>(lay, t.a(order), xp) - interpolate<cplx>(lay, t.a(order), xm)) /
              (2.0 * h);
    VecC w = spec.vector(x);
    cplx wdot{0.0, 0.0};
    for (int d = 0; d < spec.n; ++d) wdot += t.omega.vec()[d] * w[d];
    cplx aval = interpolate<cplx>(lay, t.a(order), x);
    cplx res;
    if (seeded) {
      res = da - wdot * aval;
    } else {
      const double c = 2.0 * std::max(order, 1);
      res = c * (da - wdot * aval) + interpolate<cplx>(lay, la, x);
    }
    sup = std::max(sup, std::abs(res));
  }
  return sup;
}

inline void export_expansion_csv(const ExpansionTable& t, const std::filesystem::path& path) {
  const GridLayout lay = GridLayout::of(t.grid);
  std::vector<std::string> cols;
  for (int d = 0; d < t.grid.n; ++d) cols.push_back("x" + std::to_string(d));
  cols.push_back("psi_re");
  cols.push_back("psi_im");
  for (int q = -1; q <= t.N; ++q) {
    std::string tag = q < 0 ? "m1" : std::to_string(q);
    cols.push_back("a_" + tag + "_re");
    cols.push_back("a_" + tag + "_im");
  }
  CsvWriter csv(path, cols);
  for (std::size_t i = 0; i < lay.size(); ++i) {
    Vec x = lay.point(lay.unflat(i));
    for (int d = 0; d < t.grid.n; ++d) csv.cell(x[d]);
    csv.cell(t.psi[i].real());
    csv.cell(t.psi[i].imag());
    for (int q = -1; q <= t.N; ++q) {
      csv.cell(t.a(q)[i].real());
      csv.cell(t.a(q)[i].imag());
    }
    csv.end_row();
  }
  csv.finish();
  json meta;
  meta["kind"] = t.kind == WaveKind::Delta ? "delta" : "heaviside";
  meta["order"] = t.N;
  meta["n"] = t.grid.n;
  meta["h"] = t.grid.h;
  meta["extent"] = t.grid.extent;
  meta["omega"] = std::vector<double>(t.omega.vec().data(), t.omega.vec().data() + t.grid.n);
  write_sidecar(path, meta);
}

}  // namespace pwlab
