#pragma once

// Explicit leapfrog solver for the scattered part of mollified delta- and
// Heaviside-waves. The total field U = incident + w, where the incident
// profile rides the characteristic t = x.omega and w solves
//   (d_t^2 + L) w = -(2 W.grad + V) (incident)
// from a quiescent start at t0 = -1 - epsilon.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/fields.hpp"
#include "pwlab/geometry.hpp"
#include "pwlab/interp.hpp"
#include "pwlab/mollifier.hpp"

namespace pwlab {

inline MollifiedIncident make_incident(IncidentKind kind, const SimGrid& grid) {
  return MollifiedIncident(kind, 4.0 * grid.h);
}

// Forcing felt by the scattered field; for W = V = 0 it vanishes identically.
inline cplx incident_source(const FieldSpec& spec, const Direction& omega,
                            const MollifiedIncident& inc, const Vec& x, double t) {
  VecC w = spec.vector(x);
  cplx wdo{0.0, 0.0};
  for (int d = 0; d < spec.n; ++d) wdo += omega.vec()[d] * w[d];
  cplx v = spec.scalar(x);
  const double s = t - omega.vec().dot(x);
  if (inc.kind == IncidentKind::Heaviside)
    return 2.0 * wdo * inc.delta(s) - v * inc.heaviside(s);
  return 2.0 * wdo * inc.delta_prime(s) - v * inc.delta(s);
}

enum class BoundaryRule { Dirichlet, Periodic };

struct WaveState {
  SimGrid grid;
  FieldSpec spec;  // Drift form
  Direction omega = Direction(make_vec({1.0}));
  MollifiedIncident incident{IncidentKind::Heaviside, 1.0 / 16.0};
  int step_index = 0;
  double t = 0.0;
  std::vector<cplx> u_prev, u_curr;
};

class WaveSolver {
 public:
  WaveSolver(FieldSpec spec, Direction omega, MollifiedIncident incident, SimGrid grid,
             BoundaryRule bc = BoundaryRule::Dirichlet)
      : omega_(std::move(omega)),
        incident_(incident),
        grid_(grid),
        lay_(GridLayout::of(grid)),
        bc_(bc) {
    spec_ = spec.form == Form::Drift ? std::move(spec) : convert_form(spec);
    if (spec_.n != grid_.n) throw error("field dimension does not match grid");
    const std::size_t size = lay_.size();
    u_prev_.assign(size, cplx{});
    u_curr_.assign(size, cplx{});
    u_next_.assign(size, cplx{});
    z_.resize(size);
    wdo_.resize(size);
    v_.resize(size);
    for (int d = 0; d < grid_.n; ++d) w_axis_[static_cast<std::size_t>(d)].resize(size);
    pot_.assign(size, 0);
    parallel_for_blocks(size, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        Vec x = lay_.point(lay_.unflat(i));
        z_[i] = omega_.vec().dot(x);
        VecC w = spec_.vector(x);
        cplx wdo{0.0, 0.0};
        for (int d = 0; d < grid_.n; ++d) {
          w_axis_[static_cast<std::size_t>(d)][i] = w[d];
          wdo += omega_.vec()[d] * w[d];
        }
        wdo_[i] = wdo;
        v_[i] = spec_.scalar(x);
        bool active = v_[i] != cplx{} || wdo != cplx{};
        for (int d = 0; d < grid_.n; ++d)
          active = active || w_axis_[static_cast<std::size_t>(d)][i] != cplx{};
        pot_[i] = active ? 1 : 0;
      }
    });
  }

  const SimGrid& grid() const { return grid_; }
  const GridLayout& layout() const { return lay_; }
  const FieldSpec& spec() const { return spec_; }
  const Direction& omega() const { return omega_; }
  const MollifiedIncident& incident() const { return incident_; }
  double time() const { return grid_.t0 + step_index_ * grid_.dt; }
  int step_index() const { return step_index_; }
  const std::vector<cplx>& u_curr() const { return u_curr_; }
  const std::vector<cplx>& u_prev() const { return u_prev_; }

  // Harness hook: install arbitrary field data at a given step index.
  void set_state(std::vector<cplx> prev, std::vector<cplx> curr, int step_index) {
    if (prev.size() != lay_.size() || curr.size() != lay_.size())
      throw error("state arrays do not conform to grid");
    u_prev_ = std::move(prev);
    u_curr_ = std::move(curr);
    step_index_ = step_index;
  }

  WaveState state() const {
    return WaveState{grid_, spec_, omega_, incident_, step_index_, time(), u_prev_, u_curr_};
  }

  void step() {
    const int m = lay_.m;
    const int n = grid_.n;
    const double h = grid_.h;
    const double dt = grid_.dt;
    const double t_now = time();
    const bool first = step_index_ == 0;
    const double dt2 = first ? 0.5 * dt * dt : dt * dt;
    const double inv_h2 = 1.0 / (h * h);
    const double inv_2h = 1.0 / (2.0 * h);
    const bool periodic = bc_ == BoundaryRule::Periodic;

    std::size_t strides[3] = {1, static_cast<std::size_t>(m),
                              static_cast<std::size_t>(m) * static_cast<std::size_t>(m)};
    std::size_t rows = 1;
    for (int d = 1; d < n; ++d) rows *= static_cast<std::size_t>(m);

    u_next_.assign(lay_.size(), cplx{});
    std::atomic<bool> unstable{false};

    parallel_for_blocks(rows, [&](std::size_t rlo, std::size_t rhi) {
      bool row_bad = false;
      for (std::size_t row = rlo; row < rhi; ++row) {
        int i1 = 0, i2 = 0;
        if (n >= 2) i1 = static_cast<int>(row % static_cast<std::size_t>(m));
        if (n >= 3) i2 = static_cast<int>(row / static_cast<std::size_t>(m));
        if (!periodic && n >= 2 && (i1 == 0 || i1 == m - 1)) continue;
        if (!periodic && n >= 3 && (i2 == 0 || i2 == m - 1)) continue;
        const std::size_t base = (n >= 2 ? static_cast<std::size_t>(i1) * strides[1] : 0) +
                                 (n >= 3 ? static_cast<std::size_t>(i2) * strides[2] : 0);
        const int i0_lo = periodic ? 0 : 1;
        const int i0_hi = periodic ? m - 1 : m - 2;
        for (int i0 = i0_lo; i0 <= i0_hi; ++i0) {
          const std::size_t i = base + static_cast<std::size_t>(i0);
          const cplx uc = u_curr_[i];
          cplx lap{0.0, 0.0};
          cplx drift{0.0, 0.0};
          const bool has_pot = pot_[i] != 0;
          for (int d = 0; d < n; ++d) {
            std::size_t ip, im_;
            if (periodic) {
              int id = d == 0 ? i0 : (d == 1 ? i1 : i2);
              int up = id + 1 == m ? 0 : id + 1;
              int dn = id == 0 ? m - 1 : id - 1;
              ip = i + (static_cast<std::size_t>(up) - static_cast<std::size_t>(id)) * strides[d];
              im_ = i + (static_cast<std::size_t>(dn) - static_cast<std::size_t>(id)) * strides[d];
            } else {
              ip = i + strides[d];
              im_ = i - strides[d];
            }
            const cplx uu = u_curr_[ip];
            const cplx ud = u_curr_[im_];
            lap += (uu - 2.0 * uc + ud) * inv_h2;
            if (has_pot) drift += w_axis_[static_cast<std::size_t>(d)][i] * (uu - ud) * inv_2h;
          }
          cplx rhs = lap;
          if (has_pot) {
            rhs -= 2.0 * drift + v_[i] * uc;
            rhs += source_at(i, t_now);
          }
          const cplx un = first ? uc + dt2 * rhs : 2.0 * uc - u_prev_[i] + dt2 * rhs;
          if (!std::isfinite(un.real()) || !std::isfinite(un.imag())) row_bad = true;
          u_next_[i] = un;
        }
      }
      if (row_bad) unstable.store(true, std::memory_order_relaxed);
    });

    if (unstable.load())
      throw error("instability at step " + std::to_string(step_index_ + 1));
    std::swap(u_prev_, u_curr_);
    std::swap(u_curr_, u_next_);
    ++step_index_;
  }

  // Staggered discrete energy; exactly conserved by the free-space scheme.
  double energy() const {
    const int m = lay_.m;
    const int n = grid_.n;
    const double dt = grid_.dt;
    const double inv_h2 = 1.0 / (grid_.h * grid_.h);
    const bool periodic = bc_ == BoundaryRule::Periodic;
    double cell = 1.0;
    for (int d = 0; d < n; ++d) cell *= grid_.h;

    std::vector<double> terms(lay_.size());
    std::size_t strides[3] = {1, static_cast<std::size_t>(m),
                              static_cast<std::size_t>(m) * static_cast<std::size_t>(m)};
    parallel_for_blocks(lay_.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        std::array<int, 3> idx = lay_.unflat(i);
        const cplx dtv = (u_curr_[i] - u_prev_[i]) / dt;
        double term = std::norm(dtv);
        for (int d = 0; d < n; ++d) {
          const int id = idx[static_cast<std::size_t>(d)];
          std::size_t ip;
          if (id + 1 < m) {
            ip = i + strides[d];
          } else if (periodic) {
            ip = i - static_cast<std::size_t>(m - 1) * strides[d];
          } else {
            continue;
          }
          const cplx fc = u_curr_[ip] - u_curr_[i];
          const cplx fp = u_prev_[ip] - u_prev_[i];
          term += (fc * std::conj(fp)).real() * inv_h2;
        }
        terms[i] = term * cell;
      }
    });
    return pairwise_sum(terms);
  }

 private:
  cplx source_at(std::size_t i, double t) const {
    const double s = t - z_[i];
    const double eps = incident_.epsilon;
    if (incident_.kind == IncidentKind::Heaviside) {
      if (s >= eps) return -v_[i];
      if (s <= -eps) return cplx{};
      return 2.0 * wdo_[i] * incident_.delta(s) - v_[i] * incident_.heaviside(s);
    }
    if (s >= eps || s <= -eps) return cplx{};
    return 2.0 * wdo_[i] * incident_.delta_prime(s) - v_[i] * incident_.delta(s);
  }

  FieldSpec spec_;
  Direction omega_;
  MollifiedIncident incident_;
  SimGrid grid_;
  GridLayout lay_;
  BoundaryRule bc_;
  int step_index_ = 0;
  std::vector<cplx> u_prev_, u_curr_, u_next_;
  std::vector<double> z_;
  std::vector<cplx> wdo_, v_;
  std::array<std::vector<cplx>, 3> w_axis_;
  std::vector<char> pot_;
};

// Snapshot file: text header (dims, h, t) then raw little-endian f64 pairs.
inline void write_snapshot(const WaveState& st, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "snapshot writer assumes a little-endian host");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open output file: " + path.string());
  GridLayout lay = GridLayout::of(st.grid);
  out << "pwlab-snapshot 1\n";
  out << "n " << st.grid.n << "\n";
  out << "m " << lay.m << "\n";
  out << "h " << format_full(st.grid.h) << "\n";
  out << "t " << format_full(st.t) << "\n";
  out << "data\n";
  for (const cplx& c : st.u_curr) {
    double re = c.real(), im = c.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(double));
    out.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
  if (!out) throw error("write failure: " + path.string());
}

struct Snapshot {
  int n = 0;
  int m = 0;
  double h = 0.0;
  double t = 0.0;
  std::vector<cplx> values;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open snapshot: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "pwlab-snapshot 1") throw error("snapshot header mismatch");
  Snapshot s;
  while (std::getline(in, line)) {
    if (line == "data") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "n") ls >> s.n;
    else if (key == "m") ls >> s.m;
    else if (key == "h") ls >> s.h;
    else if (key == "t") ls >> s.t;
    else throw error("snapshot header mismatch");
  }
  std::size_t count = 1;
  for (int d = 0; d < s.n; ++d) count *= static_cast<std::size_t>(s.m);
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof(double));
    in.read(reinterpret_cast<char*>(&im), sizeof(double));
    s.values[i] = cplx{re, im};
  }
  if (!in) throw error("snapshot payload truncated: " + path.string());
  return s;
}

}  // namespace pwlab
