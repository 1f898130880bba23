#pragma once

// Frequency-domain post-processing: windowed time transforms of traces with
// the e^{+i lambda t} convention, far-field amplitudes from large-radius
// asymptotics, and the sup-norm diagnostic constant r0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/csv.hpp"
#include "pwlab/fields.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/mollifier.hpp"
#include "pwlab/traces.hpp"

namespace pwlab {

struct SpectralTrace {
  std::vector<BoundaryPoint> points;
  std::vector<double> freqs;
  std::vector<cplx> values;  // point-major: [p * freqs.size() + f]
  std::string window = "half-cosine taper over final 20%";

  cplx value(std::size_t p, std::size_t f) const { return values[p * freqs.size() + f]; }
};

inline double min_resolvable_frequency(const BoundaryTrace& tr) {
  const double window = (tr.samples - 1) * tr.dt;
  return 2.0 * std::numbers::pi / window;
}

// int e^{i lambda t} w(t) value(t) dt by trapezoid rule; w tapers the final
// 20% of the window with a half cosine. Optional mu > 0 damps by e^{-mu t}
// (shifted-transform stress mode).
inline SpectralTrace fourier_trace(const BoundaryTrace& tr, const std::vector<double>& freqs,
                                   double mu = 0.0) {
  if (tr.samples < 2) throw error("trace too short to transform");
  const double lambda_min = min_resolvable_frequency(tr);
  std::vector<double> sorted = freqs;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i] > sorted[i - 1])) throw error("frequencies must be strictly increasing");
  for (double f : freqs)
    if (f < lambda_min) throw error("unresolvable frequency");

  const double t_end = tr.time_at(tr.samples - 1);
  const double len = t_end - tr.t0;
  const double t_taper = tr.t0 + 0.8 * len;

  std::vector<double> w(static_cast<std::size_t>(tr.samples));
  for (int k = 0; k < tr.samples; ++k) {
    const double t = tr.time_at(k);
    w[static_cast<std::size_t>(k)] =
        t <= t_taper ? 1.0
                     : 0.5 * (1.0 + std::cos(std::numbers::pi * (t - t_taper) / (0.2 * len)));
  }

  SpectralTrace out;
  out.points = tr.points;
  out.freqs = freqs;
  out.values.assign(tr.points.size() * freqs.size(), cplx{});
  std::vector<cplx> terms(static_cast<std::size_t>(tr.samples));
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      const double lambda = freqs[f];
      for (int k = 0; k < tr.samples; ++k) {
        const double t = tr.time_at(k);
        double trap = (k == 0 || k == tr.samples - 1) ? 0.5 : 1.0;
        cplx phase = std::exp(cplx{-mu * t, lambda * t});
        terms[static_cast<std::size_t>(k)] =
            trap * tr.dt * w[static_cast<std::size_t>(k)] * phase * tr.value(p, k);
      }
      out.values[p * freqs.size() + f] = pairwise_sum(std::span<const cplx>(terms));
    }
  }
  return out;
}

inline std::vector<double> default_freq_grid() {
  std::vector<double> freqs(16);
  for (int i = 0; i < 16; ++i)
    freqs[static_cast<std::size_t>(i)] =
        std::numbers::pi + 3.0 * std::numbers::pi * i / 15.0;
  return freqs;
}

// Companion term to fourier_trace for derivative identities: the taper trades
// the boundary term at t_end for int w'(t) e^{i lambda t} value(t) dt, so
// spectrum(dz/dt) = -i lambda spectrum(z) - taper_correction(z) holds exactly
// for any signal vanishing at t0. Shares the window of fourier_trace.
inline SpectralTrace taper_correction(const BoundaryTrace& tr,
                                      const std::vector<double>& freqs) {
  if (tr.samples < 2) throw error("trace too short to transform");
  const double t_end = tr.time_at(tr.samples - 1);
  const double len = t_end - tr.t0;
  const double t_taper = tr.t0 + 0.8 * len;
  const double rate = std::numbers::pi / (0.2 * len);

  SpectralTrace out;
  out.points = tr.points;
  out.freqs = freqs;
  out.values.assign(tr.points.size() * freqs.size(), cplx{});
  std::vector<cplx> terms(static_cast<std::size_t>(tr.samples));
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      const double lambda = freqs[f];
      for (int k = 0; k < tr.samples; ++k) {
        const double t = tr.time_at(k);
        const double dw =
            t <= t_taper ? 0.0 : -0.5 * rate * std::sin(rate * (t - t_taper));
        double trap = (k == 0 || k == tr.samples - 1) ? 0.5 : 1.0;
        terms[static_cast<std::size_t>(k)] =
            trap * tr.dt * dw * std::exp(cplx{0.0, lambda * t}) * tr.value(p, k);
      }
      out.values[p * freqs.size() + f] = pairwise_sum(std::span<const cplx>(terms));
    }
  }
  return out;
}

struct FarField {
  std::vector<BoundaryPoint> thetas;
  std::vector<double> freqs;
  std::vector<cplx> amplitude;  // theta-major: [th * freqs.size() + f]
  double radius = 3.0;
  bool truncation_caveat = true;  // large-but-finite radius asymptotics

  cplx value(std::size_t th, std::size_t f) const { return amplitude[th * freqs.size() + f]; }
};

struct FarFieldOptions {
  double h = 1.0 / 32.0;
  double t_end = 0.0;  // 0: derived from R
};

// a(lambda, theta, omega) ~ e^{-i lambda R} R^{(n-1)/2} u~^s(R theta, lambda)
// from one scattered delta-wave run sampled on |x| = R.
inline FarField far_field(const FieldSpec& spec, const Direction& omega,
                          const std::vector<double>& freqs,
                          const std::vector<BoundaryPoint>& thetas, double radius,
                          const FarFieldOptions& opt = {}) {
  if (!(radius > 1.0)) throw error("far-field radius must exceed 1");
  const int n = spec.n;
  const double t_end = opt.t_end > 0.0 ? opt.t_end : radius + 2.5;
  const double eps = 4.0 * opt.h;
  const double extent_needed = std::max(1.0 + (t_end + 1.0), radius + 4.0 * opt.h);
  SimGrid grid(n, opt.h, extent_needed, -1.0 - eps, t_end);
  if (grid.extent < radius + 3.0 * opt.h) throw error("grid too small for far-field radius");

  TraceRequest req;
  req.points.reserve(thetas.size());
  for (const auto& th : thetas) {
    BoundaryPoint bp = th;
    bp.x = Vec(th.x * radius);
    req.points.push_back(bp);
  }
  FieldSpec drift = spec.form == Form::Drift ? spec : convert_form(spec);
  WaveRun rr = run(drift, omega, MollifiedIncident(IncidentKind::Delta, eps), grid, req);
  SpectralTrace sp = fourier_trace(rr.trace, freqs);

  FarField ff;
  ff.thetas = thetas;
  ff.freqs = freqs;
  ff.radius = radius;
  ff.amplitude.assign(thetas.size() * freqs.size(), cplx{});
  const double rpow = std::pow(radius, 0.5 * (n - 1));
  for (std::size_t th = 0; th < thetas.size(); ++th) {
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      const double lambda = freqs[f];
      ff.amplitude[th * freqs.size() + f] =
          std::exp(cplx{0.0, -lambda * radius}) * rpow * sp.value(th, f);
    }
  }
  return ff;
}

// Prop-style diagnostic constant: max over specs of (2 ||A||^2 + ||q||)^{1/2}
// with sup norms sampled on a uniform grid over the unit ball.
inline double r_zero(const std::vector<FieldSpec>& specs, int samples_per_axis = 400) {
  double worst = 0.0;
  for (const FieldSpec& spec : specs) {
    if (spec.form != Form::Magnetic) throw error("r_zero expects magnetic form");
    const int n = spec.n;
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(samples_per_axis);
    // max is order-independent, so a plain scan stays bit-reproducible
    double amax = 0.0, qmax = 0.0;
    Vec x(n);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t rem = i;
      for (int d = 0; d < n; ++d) {
        const int id = static_cast<int>(rem % static_cast<std::size_t>(samples_per_axis));
        rem /= static_cast<std::size_t>(samples_per_axis);
        x[d] = -1.0 + 2.0 * (id + 0.5) / samples_per_axis;
      }
      VecC a = spec.vector(x);
      double an2 = 0.0;
      for (int d = 0; d < n; ++d) an2 += std::norm(a[d]);
      amax = std::max(amax, std::sqrt(an2));
      qmax = std::max(qmax, std::abs(spec.scalar(x)));
    }
    worst = std::max(worst, std::sqrt(2.0 * amax * amax + qmax));
  }
  return worst;
}

inline void export_far_field_csv(const FarField& ff, const std::filesystem::path& path,
                                 const Direction& omega) {
  CsvWriter csv(path, {"theta1", "theta2", "lambda", "re", "im"});
  for (std::size_t th = 0; th < ff.thetas.size(); ++th) {
    for (std::size_t f = 0; f < ff.freqs.size(); ++f) {
      csv.cell(ff.thetas[th].angle1)
          .cell(ff.thetas[th].angle2)
          .cell(ff.freqs[f])
          .cell(ff.value(th, f).real())
          .cell(ff.value(th, f).imag());
      csv.end_row();
    }
  }
  csv.finish();
  json meta;
  const int n = omega.n();
  meta["omega"] = std::vector<double>(omega.vec().data(), omega.vec().data() + n);
  meta["radius"] = ff.radius;
  meta["window"] = "half-cosine taper over final 20%";
  meta["truncation_caveat"] = ff.truncation_caveat;
  write_sidecar(path, meta);
}

inline void export_spectrum_csv(const SpectralTrace& sp, const std::filesystem::path& path) {
  CsvWriter csv(path, {"point_index", "lambda", "re", "im"});
  for (std::size_t p = 0; p < sp.points.size(); ++p) {
    for (std::size_t f = 0; f < sp.freqs.size(); ++f) {
      csv.cell(p).cell(sp.freqs[f]).cell(sp.value(p, f).real()).cell(sp.value(p, f).imag());
      csv.end_row();
    }
  }
  csv.finish();
  json meta;
  meta["window"] = sp.window;
  meta["freq_count"] = sp.freqs.size();
  write_sidecar(path, meta);
}

}  // namespace pwlab
