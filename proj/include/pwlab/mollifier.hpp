#pragma once

// Mollified incident profiles. delta_eps is the standard even bump of unit
// mass and width eps; heaviside_eps is its antiderivative. The Heaviside
// profile is evaluated from a cached cumulative table of the unit bump plus
// a local correction integral, accurate to ~1e-14.

#include <array>
#include <cmath>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

namespace detail {

inline double unit_bump_raw(double u) {
  double d = u * u - 1.0;
  if (d >= 0.0) return 0.0;
  return std::exp(1.0 / d);
}

inline double unit_bump_mass() {
  static const double mass =
      adaptive_simpson([](double u) { return unit_bump_raw(u); }, -1.0, 1.0, 1e-14);
  return mass;
}

struct UnitHeavisideTable {
  static constexpr int kIntervals = 4096;
  std::array<double, kIntervals + 1> cumulative{};
  double du = 2.0 / kIntervals;

  UnitHeavisideTable() {
    double c = 1.0 / unit_bump_mass();
    cumulative[0] = 0.0;
    for (int k = 1; k <= kIntervals; ++k) {
      double a = -1.0 + (k - 1) * du;
      double b = -1.0 + k * du;
      cumulative[static_cast<std::size_t>(k)] =
          cumulative[static_cast<std::size_t>(k - 1)] +
          c * adaptive_simpson([](double u) { return unit_bump_raw(u); }, a, b, 1e-15);
    }
  }

  double value(double u) const {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    int k = static_cast<int>(std::floor((u + 1.0) / du));
    if (k < 0) k = 0;
    if (k > kIntervals) k = kIntervals;
    double uk = -1.0 + k * du;
    double c = 1.0 / unit_bump_mass();
    return cumulative[static_cast<std::size_t>(k)] +
           c * adaptive_simpson([](double u2) { return unit_bump_raw(u2); }, uk, u, 1e-15);
  }
};

inline const UnitHeavisideTable& unit_heaviside_table() {
  static const UnitHeavisideTable table;
  return table;
}

}  // namespace detail

// Unit-width mollifier: even, supported on (-1,1), total mass 1.
inline double unit_delta(double u) {
  return detail::unit_bump_raw(u) / detail::unit_bump_mass();
}

inline double unit_delta_prime(double u) {
  double d = u * u - 1.0;
  if (d >= 0.0) return 0.0;
  return unit_delta(u) * (-2.0 * u / (d * d));
}

inline double unit_heaviside(double u) { return detail::unit_heaviside_table().value(u); }

enum class IncidentKind { Delta, Heaviside };

struct MollifiedIncident {
  IncidentKind kind = IncidentKind::Heaviside;
  double epsilon = 0.0625;

  MollifiedIncident() = default;
  MollifiedIncident(IncidentKind k, double eps) : kind(k), epsilon(eps) {
    if (!(epsilon > 0.0)) throw error("mollifier width must be positive");
  }

  double delta(double s) const { return unit_delta(s / epsilon) / epsilon; }
  double delta_prime(double s) const {
    return unit_delta_prime(s / epsilon) / (epsilon * epsilon);
  }
  double heaviside(double s) const { return unit_heaviside(s / epsilon); }

  // The incident profile itself, evaluated at s = t - x.omega.
  double profile(double s) const {
    return kind == IncidentKind::Delta ? delta(s) : heaviside(s);
  }

  // Unit-mass check, used as a constructed-object sanity invariant in tests.
  double mass() const {
    return adaptive_simpson([this](double s) { return delta(s); }, -epsilon, epsilon,
                            1e-13);
  }
};

}  // namespace pwlab
