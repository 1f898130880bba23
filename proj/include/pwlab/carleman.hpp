#pragma once

// Carleman weight machinery: the weight phi = e^{lambda eta} with
// eta = |x - vartheta|^2 - (t - z)^2 / 4, pseudoconvexity margins, weight
// separation between the characteristic surface and the time caps, the decay
// integral kappa(sigma), boundary quadratic forms, and a desk-scale
// weighted-inequality ratio experiment.
//
// Boundary form convention (index 0 = t, Lorentz product <a,b> = a_t b_t -
// grad a . grad b, Phi = <grad phi, grad phi>):
//   E^j = s_j [ 2 d_j v <grad phi, grad v> - d_j phi <grad v, grad v>
//               + sigma^2 Phi d_j phi v^2 - g v d_j v ],   s_t = -1, s_x = +1.
// 2AB = div(2 sigma E) + Q for A = box v + sigma^2 Phi v,
// B = -2 sigma <grad phi, grad v> + sigma g v, with Q free of second
// derivatives; contracting E with the downward Gamma normal (-1, omega)/sqrt2
// reproduces the tangential Z/N form. Both identities are exercised in tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/csv.hpp"
#include "pwlab/fields.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

struct CarlemanWeight {
  double lambda_w = 1.0;
  Vec vartheta;
  double T = 7.5;
  Frame frame;

  int n() const { return static_cast<int>(vartheta.size()); }
  double z(const Vec& x) const { return frame.z(x); }
  double eta(const Vec& x, double t) const {
    const double dz = t - z(x);
    return (x - vartheta).squaredNorm() - 0.25 * dz * dz;
  }
  double phi(const Vec& x, double t) const { return std::exp(lambda_w * eta(x, t)); }
  double phi0(const Vec& x) const {
    return std::exp(lambda_w * (x - vartheta).squaredNorm());
  }
  double phi_t(const Vec& x, double t) const {
    return phi(x, t) * lambda_w * (-0.5) * (t - z(x));
  }
  Vec phi_x(const Vec& x, double t) const {
    const double dz = t - z(x);
    Vec grad_eta = 2.0 * (x - vartheta) + 0.5 * dz * frame.omega.vec();
    return Vec(phi(x, t) * lambda_w * grad_eta);
  }
};

inline CarlemanWeight make_weight(double lambda_w, const Vec& vartheta, double T,
                                  const Direction& omega) {
  if (!(lambda_w > 0.0)) throw error("weight sharpness must be positive");
  if (std::abs(vartheta.norm() - 2.0) > 1e-12) throw error("vartheta must have norm 2");
  if (static_cast<int>(vartheta.size()) != omega.n())
    throw error("vartheta dimension does not match direction");
  return CarlemanWeight{lambda_w, vartheta, T, make_frame(omega)};
}

// Minimum over rho in [-1, 1] of (b-1) + (b-2) rho^2 - 2 rho; positive iff
// the sufficient pseudoconvexity inequality holds.
inline double pseudoconvexity_margin(double b) {
  if (b >= 3.0) return (b - 1.0) - 1.0 / (b - 2.0);
  return 2.0 * b - 5.0;
}

namespace detail {

// Local 3^n-neighborhood hill climb projected onto the closed unit ball.
template <class F>
inline Vec refine_on_ball(F&& value, Vec x, double step, int rounds, bool maximize) {
  const int n = static_cast<int>(x.size());
  double best = value(x);
  for (int round = 0; round < rounds; ++round) {
    for (int iter = 0; iter < 24; ++iter) {
      bool moved = false;
      std::size_t combos = 1;
      for (int d = 0; d < n; ++d) combos *= 3;
      for (std::size_t c = 0; c < combos; ++c) {
        Vec cand = x;
        std::size_t rem = c;
        for (int d = 0; d < n; ++d) {
          const int off = static_cast<int>(rem % 3) - 1;
          rem /= 3;
          cand[d] += off * step;
        }
        const double r = cand.norm();
        if (r > 1.0) cand /= r;
        const double val = value(cand);
        if (maximize ? val > best : val < best) {
          best = val;
          x = cand;
          moved = true;
        }
      }
      if (!moved) break;
    }
    step *= 0.1;
  }
  return x;
}

}  // namespace detail

struct WeightSeparation {
  double min_gamma = 0.0;  // min of phi on the characteristic surface
  double max_caps = 0.0;   // max of phi on the t = +-T caps
  double gap = 0.0;
};

inline WeightSeparation weight_separation(const CarlemanWeight& w, double grid_step = 1e-3) {
  const int n = w.n();
  // On Gamma, phi = phi0; on the caps the exponent is eta(x, +-T). Work with
  // exponents (monotone under exp) and exponentiate at the end.
  auto gamma_exponent = [&](const Vec& x) {
    return w.lambda_w * (x - w.vartheta).squaredNorm();
  };
  auto caps_exponent = [&](const Vec& x) {
    return w.lambda_w * std::max(w.eta(x, w.T), w.eta(x, -w.T));
  };

  const int m = static_cast<int>(std::lround(2.0 / grid_step)) + 1;
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(m);

  Vec best_min(n), best_max(n);
  double vmin = 0.0, vmax = 0.0;
  bool seeded = false;
  Vec x(n);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < n; ++d) {
      x[d] = -1.0 + grid_step * static_cast<double>(rem % static_cast<std::size_t>(m));
      rem /= static_cast<std::size_t>(m);
    }
    if (x.squaredNorm() > 1.0 + 1e-12) continue;
    const double ge = gamma_exponent(x);
    const double ce = caps_exponent(x);
    if (!seeded || ge < vmin) {
      vmin = ge;
      best_min = x;
    }
    if (!seeded || ce > vmax) {
      vmax = ce;
      best_max = x;
    }
    seeded = true;
  }
  best_min = detail::refine_on_ball(gamma_exponent, best_min, grid_step, 3, false);
  best_max = detail::refine_on_ball(caps_exponent, best_max, grid_step, 3, true);

  WeightSeparation out;
  out.min_gamma = std::exp(gamma_exponent(best_min));
  out.max_caps = std::exp(caps_exponent(best_max));
  out.gap = out.min_gamma - out.max_caps;
  return out;
}

// kappa(sigma) = sup over x in the closed ball of
// int_{-T}^{T} e^{2 sigma (phi(x,t) - phi(x,z))} dt.
inline double kappa(const CarlemanWeight& w, double sigma, double grid_step = 1e-2) {
  if (sigma < 0.0) throw error("sigma must be nonnegative");
  const int n = w.n();
  auto integral_at = [&](const Vec& x) {
    const double pz = w.phi(x, w.z(x));
    auto f = [&](double t) { return std::exp(2.0 * sigma * (w.phi(x, t) - pz)); };
    return adaptive_simpson(f, -w.T, w.T, 1e-8);
  };

  const int m = static_cast<int>(std::lround(2.0 / grid_step)) + 1;
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(m);
  Vec best(n);
  double vbest = -1.0;
  Vec x(n);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < n; ++d) {
      x[d] = -1.0 + grid_step * static_cast<double>(rem % static_cast<std::size_t>(m));
      rem /= static_cast<std::size_t>(m);
    }
    if (x.squaredNorm() > 1.0 + 1e-12) continue;
    const double val = integral_at(x);
    if (val > vbest) {
      vbest = val;
      best = x;
    }
  }
  best = detail::refine_on_ball(integral_at, best, grid_step, 2, true);
  return integral_at(best);
}

// Real first-order jet of a scalar function at a space-time point.
struct Jet {
  double v = 0.0;
  double vt = 0.0;
  Vec vx;
};

struct JetC {
  cplx v{};
  cplx vt{};
  VecC vx;
};

struct BoundaryForms {
  // bounded real coefficient of the -g v d_j v term (default 0)
  std::function<double(const Vec&, double)> g;

  double g_at(const Vec& x, double t) const { return g ? g(x, t) : 0.0; }
};

namespace detail {

struct PhiDerivs {
  double pt = 0.0;
  Vec px;
  double big_phi = 0.0;  // <grad phi, grad phi>_Lorentz
};

inline PhiDerivs phi_derivs(const CarlemanWeight& w, const Vec& x, double t) {
  PhiDerivs d;
  d.pt = w.phi_t(x, t);
  d.px = w.phi_x(x, t);
  d.big_phi = d.pt * d.pt - d.px.squaredNorm();
  return d;
}

inline double e_form(const CarlemanWeight& w, const BoundaryForms& forms, double sigma,
                     const Jet& jet, const Vec& x, double t, int j) {
  const PhiDerivs pd = phi_derivs(w, x, t);
  const double lpv = jet.vt * pd.pt - jet.vx.dot(pd.px);
  const double lvv = jet.vt * jet.vt - jet.vx.squaredNorm();
  const double g = forms.g_at(x, t);
  double dv, dphi, s;
  if (j == 0) {
    dv = jet.vt;
    dphi = pd.pt;
    s = -1.0;
  } else {
    dv = jet.vx[j - 1];
    dphi = pd.px[j - 1];
    s = 1.0;
  }
  return s * (2.0 * dv * lpv - dphi * lvv + sigma * sigma * pd.big_phi * dphi * jet.v * jet.v -
              g * jet.v * dv);
}

}  // namespace detail

// E^j contracted with a unit space-time normal (component 0 = t).
inline double boundary_form(const BoundaryForms& forms, const CarlemanWeight& w, double sigma,
                            const Jet& jet, const Vec& x, double t, const Vec& normal) {
  if (static_cast<int>(normal.size()) != w.n() + 1) throw error("non-unit normal");
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw error("non-unit normal");
  double acc = 0.0;
  for (int j = 0; j <= w.n(); ++j) acc += normal[j] * detail::e_form(w, forms, sigma, jet, x, t, j);
  return acc;
}

// Tangential Gamma combination built from Z = d_t + d_z, N = d_t - d_z and
// the transverse gradients; equals boundary_form with normal (-1, omega)/sqrt2.
inline double tangential_form_gamma(const BoundaryForms& forms, const CarlemanWeight& w,
                                    double sigma, const Jet& jet, const Vec& x, double t) {
  const detail::PhiDerivs pd = detail::phi_derivs(w, x, t);
  const Vec& omega = w.frame.omega.vec();
  const double vz = jet.vx.dot(omega);
  const double pz = pd.px.dot(omega);
  const double zv = jet.vt + vz;
  const double zp = pd.pt + pz;
  const double np = pd.pt - pz;
  const double vy2 = jet.vx.squaredNorm() - vz * vz;
  const double py2 = pd.px.squaredNorm() - pz * pz;
  const double vypy = jet.vx.dot(pd.px) - vz * pz;
  const double g = forms.g_at(x, t);
  return (np * (zv * zv + sigma * sigma * zp * zp * jet.v * jet.v) +
          zp * (vy2 - sigma * sigma * py2 * jet.v * jet.v) - 2.0 * zv * vypy -
          g * jet.v * zv) /
         std::sqrt(2.0);
}

// F^j for complex u: E^j applied to the substituted jets (w, grad w + sigma w
// grad phi) of the real and imaginary parts, summed. This realizes the
// conjugated form exactly, with the weight factor cancelled analytically.
inline double f_form(const BoundaryForms& forms, const CarlemanWeight& w, double sigma,
                     const JetC& ujet, const Vec& x, double t, int j) {
  const detail::PhiDerivs pd = detail::phi_derivs(w, x, t);
  double acc = 0.0;
  for (int part = 0; part < 2; ++part) {
    Jet jet;
    jet.vx = Vec(w.n());
    const double uv = part == 0 ? ujet.v.real() : ujet.v.imag();
    const double ut = part == 0 ? ujet.vt.real() : ujet.vt.imag();
    jet.v = uv;
    jet.vt = ut + sigma * uv * pd.pt;
    for (int d = 0; d < w.n(); ++d) {
      const double ux = part == 0 ? ujet.vx[d].real() : ujet.vx[d].imag();
      jet.vx[d] = ux + sigma * uv * pd.px[d];
    }
    acc += detail::e_form(w, forms, sigma, jet, x, t, j);
  }
  return acc;
}

// Analytic space-time test function with closed-form first derivatives and
// d'Alembertian, compactly supported in a box inside Q.
struct TestFunction {
  Vec center;
  double radius = 0.2;
  double t_center = 0.0;
  double t_radius = 0.5;
  double osc = 0.0;  // wave number of the e^{i k (x_1 - t)} factor

  cplx carrier(const Vec& x, double t) const {
    if (osc == 0.0) return cplx{1.0, 0.0};
    return std::exp(cplx{0.0, osc * (x[0] - t)});
  }
  cplx value(const Vec& x, double t) const {
    return space(x).value(x) * time_profile(t) * carrier(x, t);
  }
  cplx dt(const Vec& x, double t) const {
    const double b = space(x).value(x);
    const cplx c = carrier(x, t);
    return b * (time_deriv(t) - cplx{0.0, osc} * time_profile(t)) * c;
  }
  VecC grad(const Vec& x, double t) const {
    const BumpProfile bp = space(x);
    const Vec gb = bp.grad(x);
    const double b = bp.value(x);
    const cplx c = carrier(x, t);
    const double tp = time_profile(t);
    VecC out(center.size());
    for (int d = 0; d < static_cast<int>(center.size()); ++d) {
      cplx g = gb[d] * tp * c;
      if (d == 0) g += cplx{0.0, osc} * b * tp * c;
      out[d] = g;
    }
    return out;
  }
  cplx box(const Vec& x, double t) const {
    // box u = u_tt - lap u; the k^2 terms from the carrier cancel
    const BumpProfile bp = space(x);
    const double b = bp.value(x);
    const double lb = bp.laplacian(x);
    const Vec gb = bp.grad(x);
    const cplx c = carrier(x, t);
    const cplx ik{0.0, osc};
    return c * (b * time_deriv2(t) - 2.0 * ik * b * time_deriv(t) - time_profile(t) * lb -
                2.0 * ik * gb[0] * time_profile(t));
  }

 private:
  BumpProfile space(const Vec&) const { return BumpProfile{center, radius}; }
  double targ(double t) const { return (t - t_center) / t_radius; }
  double time_profile(double t) const {
    const double u = targ(t) * targ(t);
    if (u >= 1.0) return 0.0;
    return std::exp(1.0 / (u - 1.0));
  }
  double time_deriv(double t) const {
    const double s = targ(t);
    const double u = s * s;
    if (u >= 1.0) return 0.0;
    const double w = u - 1.0;
    return time_profile(t) * (-2.0 * s / (w * w)) / t_radius;
  }
  double time_deriv2(double t) const {
    const double s = targ(t);
    const double u = s * s;
    if (u >= 1.0) return 0.0;
    const double w = u - 1.0;
    // d/ds [e^{1/w} (-2s/w^2)] = e^{1/w} [4s^2/w^4 - 2/w^2 + 8s^2/w^3]
    return time_profile(t) * (4.0 * u / (w * w * w * w) - 2.0 / (w * w) + 8.0 * u / (w * w * w)) /
           (t_radius * t_radius);
  }
};

struct RatioResult {
  std::vector<double> sigmas;
  std::vector<double> ratios;
};

// ratio(sigma) = sigma int e^{2 sigma phi} (|grad u|^2 + sigma^2 |u|^2)
//              / int e^{2 sigma phi} |box u|^2,
// computed on a tensor lattice over the declared support box with the weight
// factored by its lattice maximum.
inline RatioResult carleman_ratio(const CarlemanWeight& w, const std::vector<double>& sigmas,
                                  const TestFunction& u, int nodes_space = 192,
                                  int nodes_time = 96) {
  const int n = w.n();
  if (static_cast<int>(u.center.size()) != n) throw error("test function dimension mismatch");
  if (u.center.norm() + u.radius >= 1.0 - 1e-9) throw error("not compactly supported");
  if (std::abs(u.t_center) + u.t_radius >= w.T - 1e-9) throw error("not compactly supported");

  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(nodes_space);
  total *= static_cast<std::size_t>(nodes_time);

  // cell-centered lattice over the support box
  const double hx = 2.0 * u.radius / nodes_space;
  const double ht = 2.0 * u.t_radius / nodes_time;
  auto point_of = [&](std::size_t i, Vec& x, double& t) {
    std::size_t rem = i;
    for (int d = 0; d < n; ++d) {
      const int id = static_cast<int>(rem % static_cast<std::size_t>(nodes_space));
      rem /= static_cast<std::size_t>(nodes_space);
      x[d] = u.center[d] - u.radius + hx * (id + 0.5);
    }
    t = u.t_center - u.t_radius + ht * (static_cast<int>(rem) + 0.5);
  };

  std::vector<double> phi_vals(total);
  double umax = 0.0;
  {
    Vec x(n);
    double t = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      point_of(i, x, t);
      phi_vals[i] = w.phi(x, t);
      umax = std::max(umax, std::abs(u.value(x, t)));
    }
  }
  if (umax == 0.0) throw error("degenerate test function");
  const double phi_max = *std::max_element(phi_vals.begin(), phi_vals.end());

  RatioResult out;
  out.sigmas = sigmas;
  out.ratios.resize(sigmas.size());
  std::vector<double> num_terms(total), den_terms(total);
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const double sigma = sigmas[si];
    Vec x(n);
    double t = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      point_of(i, x, t);
      const double wgt = std::exp(2.0 * sigma * (phi_vals[i] - phi_max));
      const cplx uv = u.value(x, t);
      const cplx ut = u.dt(x, t);
      const VecC ug = u.grad(x, t);
      double grad2 = std::norm(ut);
      for (int d = 0; d < n; ++d) grad2 += std::norm(ug[d]);
      num_terms[i] = wgt * (grad2 + sigma * sigma * std::norm(uv));
      den_terms[i] = wgt * std::norm(u.box(x, t));
    }
    const double num = pairwise_sum(num_terms);
    const double den = pairwise_sum(den_terms);
    if (den == 0.0) throw error("degenerate test function");
    out.ratios[si] = sigma * num / den;
  }
  return out;
}

inline void export_kappa_csv(const CarlemanWeight& w, const std::vector<double>& sigmas,
                             const std::vector<double>& kappas,
                             const std::filesystem::path& path) {
  CsvWriter csv(path, {"sigma", "kappa"});
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    csv.cell(sigmas[i]).cell(kappas[i]);
    csv.end_row();
  }
  csv.finish();
  json meta;
  meta["lambda_w"] = w.lambda_w;
  meta["T"] = w.T;
  meta["vartheta"] = std::vector<double>(w.vartheta.data(), w.vartheta.data() + w.n());
  write_sidecar(path, meta);
}

inline void export_ratio_csv(const CarlemanWeight& w, const RatioResult& r,
                             const std::filesystem::path& path) {
  CsvWriter csv(path, {"sigma", "ratio"});
  for (std::size_t i = 0; i < r.sigmas.size(); ++i) {
    csv.cell(r.sigmas[i]).cell(r.ratios[i]);
    csv.end_row();
  }
  csv.finish();
  json meta;
  meta["lambda_w"] = w.lambda_w;
  meta["T"] = w.T;
  write_sidecar(path, meta);
}

inline void export_margin_csv(const std::vector<double>& bs, const std::filesystem::path& path) {
  CsvWriter csv(path, {"b", "margin"});
  for (double b : bs) {
    csv.cell(b).cell(pseudoconvexity_margin(b));
    csv.end_row();
  }
  csv.finish();
  json meta;
  meta["note"] = "margin positive iff the sufficient pseudoconvexity inequality holds";
  write_sidecar(path, meta);
}

inline void export_separation_csv(const CarlemanWeight& w, const WeightSeparation& s,
                                  const std::filesystem::path& path) {
  CsvWriter csv(path, {"min_gamma", "max_caps", "gap"});
  csv.cell(s.min_gamma).cell(s.max_caps).cell(s.gap);
  csv.end_row();
  csv.finish();
  json meta;
  meta["lambda_w"] = w.lambda_w;
  meta["T"] = w.T;
  meta["vartheta"] = std::vector<double>(w.vartheta.data(), w.vartheta.data() + w.n());
  write_sidecar(path, meta);
}

}  // namespace pwlab
