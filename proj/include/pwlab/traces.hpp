#pragma once

// Boundary traces of scattered fields, the on-front limit protocol, the
// time-integral identity linking Heaviside- and delta-wave data, and
// discrepancy metrics between potential pairs.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "pwlab/common.hpp"
#include "pwlab/csv.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/interp.hpp"
#include "pwlab/mollifier.hpp"
#include "pwlab/quadrature.hpp"
#include "pwlab/wavesolver.hpp"

namespace pwlab {

struct TraceRequest {
  std::vector<BoundaryPoint> points;
};

struct BoundaryTrace {
  std::vector<BoundaryPoint> points;
  Direction omega = Direction(make_vec({1.0}));
  IncidentKind kind = IncidentKind::Heaviside;
  double t0 = 0.0;
  double dt = 0.0;
  int samples = 0;
  double epsilon = 0.0;
  double h = 0.0;
  std::vector<cplx> values;  // point-major: [p * samples + k]
  std::vector<char> mask;    // 1 where t >= x.omega

  double time_at(int k) const { return t0 + k * dt; }
  double z_of(std::size_t p) const { return omega.vec().dot(points[p].x); }
  cplx value(std::size_t p, int k) const {
    return values[p * static_cast<std::size_t>(samples) + static_cast<std::size_t>(k)];
  }
  cplx& value(std::size_t p, int k) {
    return values[p * static_cast<std::size_t>(samples) + static_cast<std::size_t>(k)];
  }
  bool same_sampling(const BoundaryTrace& o) const {
    return points.size() == o.points.size() && samples == o.samples &&
           std::abs(t0 - o.t0) < 1e-12 && std::abs(dt - o.dt) < 1e-12;
  }
};

// One-off interpolation of a field snapshot to arbitrary points.
inline std::vector<cplx> extract(const WaveState& st, const std::vector<BoundaryPoint>& pts) {
  GridLayout lay = GridLayout::of(st.grid);
  std::vector<cplx> out(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p)
    out[p] = interpolate<cplx>(lay, st.u_curr, pts[p].x);
  return out;
}

struct WaveRun {
  WaveState state;
  BoundaryTrace trace;
};

// Full simulation from the quiescent state, recording the scattered field at
// the requested points every step.
inline WaveRun run(const FieldSpec& spec, const Direction& omega,
                   const MollifiedIncident& incident, const SimGrid& grid,
                   const TraceRequest& request, BoundaryRule bc = BoundaryRule::Dirichlet) {
  if (grid.t0 > -1.0 - incident.epsilon + 1e-12)
    throw error("time window must cover the quiescent start t0 <= -1-epsilon");
  WaveSolver solver(spec, omega, incident, grid, bc);
  const GridLayout lay = solver.layout();

  BoundaryTrace trace;
  trace.points = request.points;
  trace.omega = omega;
  trace.kind = incident.kind;
  trace.t0 = grid.t0;
  trace.dt = grid.dt;
  trace.samples = grid.step_count() + 1;
  trace.epsilon = incident.epsilon;
  trace.h = grid.h;
  trace.values.assign(trace.points.size() * static_cast<std::size_t>(trace.samples), cplx{});
  trace.mask.assign(trace.values.size(), 0);

  std::vector<CubicStencil> stencils;
  stencils.reserve(trace.points.size());
  for (const auto& bp : trace.points) stencils.push_back(CubicStencil::at(lay, bp.x));

  const int steps = grid.step_count();
  for (int k = 0; k <= steps; ++k) {
    const double t = grid.t0 + k * grid.dt;
    const std::vector<cplx>& u = solver.u_curr();
    for (std::size_t p = 0; p < trace.points.size(); ++p) {
      trace.value(p, k) = stencils[p].apply(lay, std::span<const cplx>(u));
      if (t >= trace.z_of(p)) trace.mask[p * static_cast<std::size_t>(trace.samples) +
                                         static_cast<std::size_t>(k)] = 1;
    }
    if (k < steps) solver.step();
  }
  return WaveRun{solver.state(), std::move(trace)};
}

// Max pre-front magnitude relative to the overall trace magnitude. The
// discrete front is margin * epsilon wide: the mollified layer plus the
// leading skirt the grid smears ahead of it.
inline double causality_violation(const BoundaryTrace& tr, double margin = 4.0) {
  double overall = 0.0, ahead = 0.0;
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    const double z = tr.z_of(p);
    for (int k = 0; k < tr.samples; ++k) {
      const double a = std::abs(tr.value(p, k));
      overall = std::max(overall, a);
      if (tr.time_at(k) < z - margin * tr.epsilon) ahead = std::max(ahead, a);
    }
  }
  if (overall < 1e-300) return 0.0;
  return ahead / overall;
}

// Scattered trace plus the incident profile riding t = z: the total field.
inline BoundaryTrace add_incident(const BoundaryTrace& tr) {
  BoundaryTrace out = tr;
  MollifiedIncident inc(tr.kind, tr.epsilon);
  for (std::size_t p = 0; p < out.points.size(); ++p) {
    const double z = out.z_of(p);
    for (int k = 0; k < out.samples; ++k) out.value(p, k) += inc.profile(out.time_at(k) - z);
  }
  return out;
}

// On-front value per point. Both protocols live past the mollified layer,
// where the profile factors are exact and the incident spike has support
// zero. An H-wave trace is smooth there, so a linear detrend over
// [z+3eps, z+5eps] evaluated at t = z recovers the limit. A delta trace
// drags a grid-scale oscillatory tail behind the transmitted spike, so the
// limit is read off the running time integral instead: its quadratic fit
// over [z+3eps, z+6eps] carries the on-front value as the linear
// coefficient, and integration has already averaged the tail away.
inline std::vector<cplx> gamma_limit(const BoundaryTrace& tr) {
  const bool spike = tr.kind == IncidentKind::Delta;
  const int deg = spike ? 2 : 1;
  const double hi_mult = spike ? 6.0 : 5.0;
  std::vector<cplx> out(tr.points.size());
  std::vector<cplx> integ(static_cast<std::size_t>(tr.samples));
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    if (spike) {
      integ[0] = 0.0;
      for (int k = 1; k < tr.samples; ++k)
        integ[static_cast<std::size_t>(k)] =
            integ[static_cast<std::size_t>(k - 1)] +
            0.5 * tr.dt * (tr.value(p, k - 1) + tr.value(p, k));
    }
    const double z = tr.z_of(p);
    const double lo = z + 3.0 * tr.epsilon;
    const double hi = z + hi_mult * tr.epsilon;
    if (lo < tr.t0 - 1e-12 || hi > tr.t0 + (tr.samples - 1) * tr.dt + 1e-12)
      throw error("window outside recorded times");
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
    int used = 0;
    for (int k = 0; k < tr.samples; ++k) {
      const double t = tr.time_at(k);
      if (t < lo || t > hi) continue;
      const double s = (t - z) / tr.epsilon;  // scaled for conditioning
      const cplx v = spike ? integ[static_cast<std::size_t>(k)] : tr.value(p, k);
      double pw = 1.0;
      for (int a = 0; a <= deg; ++a) {
        rhs[a] += pw * v;
        double pw2 = pw * pw;
        for (int b = a; b <= deg; ++b) {
          m(a, b) += pw2;
          pw2 *= s;
        }
        pw *= s;
      }
      ++used;
    }
    if (used < deg + 2) throw error("window outside recorded times");
    m = m.selfadjointView<Eigen::Upper>();
    const int sz = deg + 1;
    Eigen::Vector3cd coef = Eigen::Vector3cd::Zero();
    coef.head(sz) = m.topLeftCorner(sz, sz).lu().solve(rhs.head(sz));
    out[p] = spike ? coef[1] / tr.epsilon : coef[0];
  }
  return out;
}

// Residual of the reconstruction u_H(t) = int_z^t v dtau + e^psi in its
// mollified form, exact in the continuum for every t: the mollified singular
// part e^psi delta_eps is removed from the delta-wave data before
// integrating and the Heaviside ramp is carried explicitly.
inline double integral_identity_residual(const BoundaryTrace& trace_h,
                                         const BoundaryTrace& trace_delta,
                                         const std::vector<cplx>& psi_boundary) {
  if (!trace_h.same_sampling(trace_delta)) throw error("sampling mismatch");
  if (psi_boundary.size() != trace_h.points.size()) throw error("sampling mismatch");
  MollifiedIncident inc_h(IncidentKind::Heaviside, trace_h.epsilon);
  MollifiedIncident inc_d(IncidentKind::Delta, trace_delta.epsilon);
  double worst = 0.0;
  std::vector<cplx> vrec(static_cast<std::size_t>(trace_h.samples));
  for (std::size_t p = 0; p < trace_h.points.size(); ++p) {
    const double z = trace_h.z_of(p);
    const cplx e = std::exp(psi_boundary[p]);
    for (int k = 0; k < trace_h.samples; ++k) {
      const double s = trace_h.time_at(k) - z;
      vrec[static_cast<std::size_t>(k)] = trace_delta.value(p, k) - (e - 1.0) * inc_d.delta(s);
    }
    cplx cum{};
    cplx prev = vrec[0];
    for (int k = 0; k < trace_h.samples; ++k) {
      if (k > 0) {
        cum += 0.5 * trace_h.dt * (prev + vrec[static_cast<std::size_t>(k)]);
        prev = vrec[static_cast<std::size_t>(k)];
      }
      const double s = trace_h.time_at(k) - z;
      if (s < 0.0) continue;
      const cplx lhs = trace_h.value(p, k) + inc_h.heaviside(s);
      const cplx rhs = e * inc_h.heaviside(s) + cum;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

enum class TraceNorm { L2, Linf };

inline double discrepancy(const BoundaryTrace& a, const BoundaryTrace& b, TraceNorm norm) {
  if (!a.same_sampling(b)) throw error("sampling mismatch");
  const std::size_t total = a.values.size();
  std::vector<double> diff2, a2, b2;
  double dmax = 0.0, amax = 0.0, bmax = 0.0;
  if (norm == TraceNorm::L2) {
    diff2.reserve(total);
    a2.reserve(total);
    b2.reserve(total);
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (!a.mask[i]) continue;
    const double dv = std::abs(a.values[i] - b.values[i]);
    const double av = std::abs(a.values[i]);
    const double bv = std::abs(b.values[i]);
    if (norm == TraceNorm::L2) {
      diff2.push_back(dv * dv);
      a2.push_back(av * av);
      b2.push_back(bv * bv);
    } else {
      dmax = std::max(dmax, dv);
      amax = std::max(amax, av);
      bmax = std::max(bmax, bv);
    }
  }
  double num, na, nb;
  if (norm == TraceNorm::L2) {
    num = std::sqrt(pairwise_sum(diff2));
    na = std::sqrt(pairwise_sum(a2));
    nb = std::sqrt(pairwise_sum(b2));
  } else {
    num = dmax;
    na = amax;
    nb = bmax;
  }
  return num / std::max({na, nb, 1e-14});
}

// Comparison form of a trace: the running time integral, masked past the
// mollified layer. At fixed eps/h the delta spike drags a self-similar
// dispersive tail behind it, so raw samples of two discretely different runs
// stay apart no matter how fine the grid; pairing with the Heaviside test
// function restores second-order agreement, and the margin drops the layer
// where profile slewing dominates the difference.
inline BoundaryTrace comparison_form(const BoundaryTrace& tr, double margin = 3.0) {
  BoundaryTrace out = tr;
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    const std::size_t row = p * static_cast<std::size_t>(tr.samples);
    cplx cum = 0.0;
    out.values[row] = 0.0;
    for (int k = 1; k < tr.samples; ++k) {
      cum += 0.5 * tr.dt * (tr.value(p, k - 1) + tr.value(p, k));
      out.values[row + static_cast<std::size_t>(k)] = cum;
    }
    const double cut = tr.z_of(p) + margin * tr.epsilon;
    for (int k = 0; k < tr.samples; ++k)
      if (tr.time_at(k) < cut) out.mask[row + static_cast<std::size_t>(k)] = 0;
  }
  return out;
}

inline void export_trace_csv(const BoundaryTrace& tr, const std::filesystem::path& path,
                             std::uint64_t spec_hash) {
  CsvWriter csv(path, {"point_index", "angle1", "angle2", "t", "re", "im", "mask"});
  for (std::size_t p = 0; p < tr.points.size(); ++p) {
    for (int k = 0; k < tr.samples; ++k) {
      csv.cell(p)
          .cell(tr.points[p].angle1)
          .cell(tr.points[p].angle2)
          .cell(tr.time_at(k))
          .cell(tr.value(p, k).real())
          .cell(tr.value(p, k).imag())
          .cell(static_cast<int>(tr.mask[p * static_cast<std::size_t>(tr.samples) +
                                         static_cast<std::size_t>(k)]));
      csv.end_row();
    }
  }
  csv.finish();
  json meta;
  const int n = tr.omega.n();
  meta["omega"] = std::vector<double>(tr.omega.vec().data(), tr.omega.vec().data() + n);
  meta["epsilon"] = tr.epsilon;
  meta["h"] = tr.h;
  meta["spec_hash"] = hex64(spec_hash);
  meta["kind"] = tr.kind == IncidentKind::Delta ? "delta" : "heaviside";
  meta["t0"] = tr.t0;
  meta["dt"] = tr.dt;
  meta["samples"] = tr.samples;
  meta["points"] = tr.points.size();
  write_sidecar(path, meta);
}

inline BoundaryTrace import_trace_csv(const std::filesystem::path& path) {
  json meta = read_sidecar(path);
  std::ifstream in(path);
  if (!in) throw error("cannot open trace file: " + path.string());
  BoundaryTrace tr;
  std::vector<double> om = meta.at("omega").get<std::vector<double>>();
  Vec omega(static_cast<int>(om.size()));
  for (std::size_t d = 0; d < om.size(); ++d) omega[static_cast<int>(d)] = om[d];
  tr.omega = Direction(omega);
  tr.epsilon = meta.at("epsilon").get<double>();
  tr.h = meta.at("h").get<double>();
  tr.kind = meta.at("kind").get<std::string>() == "delta" ? IncidentKind::Delta
                                                          : IncidentKind::Heaviside;
  tr.t0 = meta.at("t0").get<double>();
  tr.dt = meta.at("dt").get<double>();
  tr.samples = meta.at("samples").get<int>();
  const std::size_t npts = meta.at("points").get<std::size_t>();
  const int n = static_cast<int>(om.size());
  tr.points.resize(npts);
  tr.values.assign(npts * static_cast<std::size_t>(tr.samples), cplx{});
  tr.mask.assign(tr.values.size(), 0);

  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw error("trace parse error at line " + std::to_string(row + 2));
    const std::size_t p = std::stoul(cells[0]);
    const double a1 = std::stod(cells[1]);
    const double a2 = std::stod(cells[2]);
    if (p >= npts) throw error("trace parse error at line " + std::to_string(row + 2));
    BoundaryPoint bp;
    bp.angle1 = a1;
    bp.angle2 = a2;
    if (n == 1) bp.x = make_vec({a1 < 1.0 ? 1.0 : -1.0});
    if (n == 2) bp.x = make_vec({std::cos(a1), std::sin(a1)});
    if (n == 3)
      bp.x = make_vec({std::sin(a2) * std::cos(a1), std::sin(a2) * std::sin(a1), std::cos(a2)});
    tr.points[p] = bp;
    const int k = static_cast<int>(row % static_cast<std::size_t>(tr.samples));
    tr.values[p * static_cast<std::size_t>(tr.samples) + static_cast<std::size_t>(k)] =
        cplx{std::stod(cells[4]), std::stod(cells[5])};
    tr.mask[p * static_cast<std::size_t>(tr.samples) + static_cast<std::size_t>(k)] =
        cells[6] == "1" ? 1 : 0;
    ++row;
  }
  if (row != tr.values.size()) throw error("trace file truncated: " + path.string());
  return tr;
}

}  // namespace pwlab
