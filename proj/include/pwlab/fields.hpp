#pragma once

// Compactly supported potentials in the two Hamiltonian forms:
//   Magnetic: H = (D + A)^2 + q,  D = -i grad
//   Drift:    L = -Lap + 2 W.grad + V
// plus gauge transforms, the gauge-fixing construction that kills the
// omega-component of A, normalization/symmetry certificates, and a
// structured-text serialization for bump-built potentials.

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/quadrature.hpp"

namespace pwlab {

enum class Form { Magnetic, Drift };

// Smooth bump profile exp(1/(|x-c|^2/r^2 - 1)) on |x-c| < r, 0 outside.
// All derivatives are analytic; they underflow to exactly 0 together with
// the profile near the support boundary, so no special casing is needed.
struct BumpProfile {
  Vec center;
  double radius = 0.0;

  double value(const Vec& x) const {
    double u = (x - center).squaredNorm() / (radius * radius);
    if (u >= 1.0) return 0.0;
    return std::exp(1.0 / (u - 1.0));
  }
  Vec grad(const Vec& x) const {
    Vec d = x - center;
    double r2 = radius * radius;
    double u = d.squaredNorm() / r2;
    if (u >= 1.0) return Vec::Zero(x.size());
    double B = std::exp(1.0 / (u - 1.0));
    double gp = -1.0 / ((u - 1.0) * (u - 1.0));
    return Vec(B * gp * (2.0 / r2) * d);
  }
  MatR hess(const Vec& x) const {
    int n = static_cast<int>(x.size());
    Vec d = x - center;
    double r2 = radius * radius;
    double u = d.squaredNorm() / r2;
    if (u >= 1.0) return MatR::Zero(n, n);
    double B = std::exp(1.0 / (u - 1.0));
    double um1 = u - 1.0;
    double gp = -1.0 / (um1 * um1);
    double gpp = 2.0 / (um1 * um1 * um1);
    Vec du = Vec(2.0 / r2 * d);
    MatR H = (B * (gp * gp + gpp)) * (du * du.transpose());
    H += (B * gp * 2.0 / r2) * MatR::Identity(n, n);
    return H;
  }
  double laplacian(const Vec& x) const {
    int n = static_cast<int>(x.size());
    Vec d = x - center;
    double r2 = radius * radius;
    double u = d.squaredNorm() / r2;
    if (u >= 1.0) return 0.0;
    double B = std::exp(1.0 / (u - 1.0));
    double um1 = u - 1.0;
    double gp = -1.0 / (um1 * um1);
    double gpp = 2.0 / (um1 * um1 * um1);
    return B * ((gp * gp + gpp) * 4.0 * d.squaredNorm() / (r2 * r2) +
                2.0 * n * gp / r2);
  }
};

struct ScalarBump {
  BumpProfile profile;
  cplx amp{0.0, 0.0};
};

struct VectorBump {
  BumpProfile profile;
  VecC amp;
};

// Escape hatch for potential parts that are not plain bumps (gauge-shifted
// vector parts, converted scalar parts). Missing derivative closures fall
// back to centered differences with step h_fd = 1e-5.
struct VectorExtra {
  std::function<VecC(const Vec&)> val;
  std::function<MatC(const Vec&)> jac;
  std::function<VecC(const Vec&)> lap;
};

struct ScalarExtra {
  std::function<cplx(const Vec&)> val;
};

inline constexpr double kFdStep = 1e-5;

struct FieldSpec {
  Form form = Form::Drift;
  int n = 2;
  double support_radius = 0.0;
  std::string smoothness = "C-infinity";
  std::vector<VectorBump> vec_bumps;
  std::vector<ScalarBump> scal_bumps;
  std::vector<VectorExtra> vec_extras;
  std::vector<ScalarExtra> scal_extras;

  bool pure_bumps() const { return vec_extras.empty() && scal_extras.empty(); }

  VecC vector(const Vec& x) const {
    VecC out = VecC::Zero(n);
    for (const auto& b : vec_bumps) out += b.amp * b.profile.value(x);
    for (const auto& e : vec_extras) out += e.val(x);
    return out;
  }

  MatC vector_jac(const Vec& x) const {  // J(i,j) = d A_i / d x_j
    MatC out = MatC::Zero(n, n);
    for (const auto& b : vec_bumps) {
      Vec g = b.profile.grad(x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) += b.amp[i] * g[j];
    }
    for (const auto& e : vec_extras) {
      if (e.jac) {
        out += e.jac(x);
      } else {
        for (int j = 0; j < n; ++j) {
          Vec xp = x, xm = x;
          xp[j] += kFdStep;
          xm[j] -= kFdStep;
          VecC diff = (e.val(xp) - e.val(xm)) / (2.0 * kFdStep);
          for (int i = 0; i < n; ++i) out(i, j) += diff[i];
        }
      }
    }
    return out;
  }

  VecC vector_lap(const Vec& x) const {
    VecC out = VecC::Zero(n);
    for (const auto& b : vec_bumps) out += b.amp * b.profile.laplacian(x);
    for (const auto& e : vec_extras) {
      if (e.lap) {
        out += e.lap(x);
      } else {
        VecC acc = VecC::Zero(n);
        VecC center = e.val(x);
        for (int j = 0; j < n; ++j) {
          Vec xp = x, xm = x;
          xp[j] += kFdStep;
          xm[j] -= kFdStep;
          acc += (e.val(xp) - 2.0 * center + e.val(xm)) / (kFdStep * kFdStep);
        }
        out += acc;
      }
    }
    return out;
  }

  cplx divergence(const Vec& x) const { return vector_jac(x).trace(); }

  cplx scalar(const Vec& x) const {
    cplx out{0.0, 0.0};
    for (const auto& b : scal_bumps) out += b.amp * b.profile.value(x);
    for (const auto& e : scal_extras) out += e.val(x);
    return out;
  }
};

// Regularity index of the main theorems, exposed as a diagnostic; every
// built-in potential is a C-infinity bump and dominates it.
struct RegularityIndex {
  int N;
  int M;
};

inline RegularityIndex regularity_index(int n) {
  if (n % 2 == 0) return {(n + 6) / 2, (3 * n) / 2 + 10};
  return {(n + 7) / 2, (3 * (n + 1)) / 2 + 10};
}

namespace detail {
inline void check_ball(const Vec& c, double r) {
  if (c.norm() + r > 1.0 + 1e-12) throw error("support leaves unit ball");
}
}  // namespace detail

inline FieldSpec make_bump_potential(int n, const std::vector<Vec>& centers,
                                     const std::vector<double>& radii,
                                     const std::vector<cplx>& amplitudes,
                                     Form form = Form::Drift) {
  if (centers.size() != radii.size() || centers.size() != amplitudes.size())
    throw error("bump parameter lists must have equal lengths");
  FieldSpec spec;
  spec.form = form;
  spec.n = n;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    detail::check_ball(centers[k], radii[k]);
    spec.scal_bumps.push_back({BumpProfile{centers[k], radii[k]}, amplitudes[k]});
    spec.support_radius = std::max(spec.support_radius, centers[k].norm() + radii[k]);
  }
  return spec;
}

inline FieldSpec make_bump_potential(int n, const std::vector<Vec>& centers,
                                     const std::vector<double>& radii,
                                     const std::vector<VecC>& amplitudes,
                                     Form form = Form::Drift) {
  if (centers.size() != radii.size() || centers.size() != amplitudes.size())
    throw error("bump parameter lists must have equal lengths");
  FieldSpec spec;
  spec.form = form;
  spec.n = n;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    detail::check_ball(centers[k], radii[k]);
    spec.vec_bumps.push_back({BumpProfile{centers[k], radii[k]}, amplitudes[k]});
    spec.support_radius = std::max(spec.support_radius, centers[k].norm() + radii[k]);
  }
  return spec;
}

inline FieldSpec merge_parts(FieldSpec a, const FieldSpec& b) {
  if (a.form != b.form) throw error("cannot merge fields of different forms");
  if (a.n != b.n) throw error("cannot merge fields of different dimensions");
  a.vec_bumps.insert(a.vec_bumps.end(), b.vec_bumps.begin(), b.vec_bumps.end());
  a.scal_bumps.insert(a.scal_bumps.end(), b.scal_bumps.begin(), b.scal_bumps.end());
  a.vec_extras.insert(a.vec_extras.end(), b.vec_extras.begin(), b.vec_extras.end());
  a.scal_extras.insert(a.scal_extras.end(), b.scal_extras.begin(), b.scal_extras.end());
  a.support_radius = std::max(a.support_radius, b.support_radius);
  return a;
}

// Divergence-free rotational vector field amp * (x_2, -x_1, 0...) * bump(|x|/r).
// Used by scenarios that need a vector part with zero line integrals in every
// direction. Analytic first and second derivatives.
inline FieldSpec make_rotational_field(int n, double amp, double radius,
                                       Form form = Form::Drift) {
  if (n < 2) throw error("rotational field needs n >= 2");
  detail::check_ball(Vec::Zero(n), radius);
  BumpProfile prof{Vec::Zero(n), radius};
  auto rot = [n](const Vec& x) {
    Vec v = Vec::Zero(n);
    v[0] = x[1];
    v[1] = -x[0];
    return v;
  };
  VectorExtra extra;
  extra.val = [prof, rot, amp, n](const Vec& x) {
    VecC out = VecC::Zero(n);
    Vec r = rot(x);
    double B = prof.value(x);
    for (int i = 0; i < n; ++i) out[i] = amp * r[i] * B;
    return out;
  };
  extra.jac = [prof, rot, amp, n](const Vec& x) {
    MatC out = MatC::Zero(n, n);
    Vec r = rot(x);
    double B = prof.value(x);
    Vec g = prof.grad(x);
    // d/dx_j (r_i B) = (dr_i/dx_j) B + r_i g_j ; dr/dx = [[0,1],[ -1,0]] block
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = amp * r[i] * g[j];
    out(0, 1) += amp * B;
    out(1, 0) -= amp * B;
    return out;
  };
  extra.lap = [prof, rot, amp, n](const Vec& x) {
    VecC out = VecC::Zero(n);
    Vec r = rot(x);
    double lapB = prof.laplacian(x);
    Vec g = prof.grad(x);
    // Lap(r_i B) = r_i Lap B + 2 grad(r_i).grad(B); grad(r_0) = e_2, grad(r_1) = -e_1
    out[0] = amp * (r[0] * lapB + 2.0 * g[1]);
    out[1] = amp * (r[1] * lapB - 2.0 * g[0]);
    for (int i = 2; i < n; ++i) out[i] = amp * r[i] * lapB;
    return out;
  };
  FieldSpec spec;
  spec.form = form;
  spec.n = n;
  spec.support_radius = radius;
  spec.vec_extras.push_back(std::move(extra));
  return spec;
}

// ---------------------------------------------------------------------------
// Form conversion: Magnetic(A, q) <-> Drift(W = -iA, V = A.A - i div A + q).

inline FieldSpec convert_form(const FieldSpec& spec) {
  const cplx unit_i{0.0, 1.0};
  cplx factor = spec.form == Form::Magnetic ? -unit_i : unit_i;  // W = -iA, A = iW
  FieldSpec out;
  out.n = spec.n;
  out.support_radius = spec.support_radius;
  out.smoothness = spec.smoothness;
  out.form = spec.form == Form::Magnetic ? Form::Drift : Form::Magnetic;

  for (const auto& b : spec.vec_bumps)
    out.vec_bumps.push_back({b.profile, VecC(factor * b.amp)});
  for (const auto& e : spec.vec_extras) {
    VectorExtra w;
    w.val = [f = factor, v = e.val](const Vec& x) { return VecC(f * v(x)); };
    if (e.jac) w.jac = [f = factor, j = e.jac](const Vec& x) { return MatC(f * j(x)); };
    if (e.lap) w.lap = [f = factor, l = e.lap](const Vec& x) { return VecC(f * l(x)); };
    out.vec_extras.push_back(std::move(w));
  }

  out.scal_bumps = spec.scal_bumps;
  out.scal_extras = spec.scal_extras;
  if (spec.form == Form::Magnetic) {
    // V = q + A.A + D.A, with D.A = -i div A (no conjugation in A.A).
    ScalarExtra add;
    add.val = [src = spec](const Vec& x) {
      VecC A = src.vector(x);
      cplx a2 = 0.0;
      for (int i = 0; i < src.n; ++i) a2 += A[i] * A[i];
      return a2 - cplx{0.0, 1.0} * src.divergence(x);
    };
    out.scal_extras.push_back(std::move(add));
  } else {
    // q = V - A.A - D.A for A = iW: equals V + W.W - div W.
    ScalarExtra sub;
    sub.val = [src = spec](const Vec& x) {
      VecC W = src.vector(x);
      cplx w2 = 0.0;
      for (int i = 0; i < src.n; ++i) w2 += W[i] * W[i];
      return w2 - src.divergence(x);
    };
    out.scal_extras.push_back(std::move(sub));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gauge machinery.

struct GaugeFunction {
  std::vector<ScalarBump> bumps;
  double support_radius = 0.0;
  // Quadrature-built gauge functions (from gauge_fix_nth) live here instead.
  std::function<cplx(const Vec&)> f_num;
  std::function<VecC(const Vec&)> grad_num;

  int dim(int fallback) const {
    return bumps.empty() ? fallback : static_cast<int>(bumps[0].profile.center.size());
  }
  cplx f(const Vec& x) const {
    if (f_num) return f_num(x);
    cplx out{0.0, 0.0};
    for (const auto& b : bumps) out += b.amp * b.profile.value(x);
    return out;
  }
  VecC grad(const Vec& x) const {
    if (grad_num) return grad_num(x);
    VecC out = VecC::Zero(x.size());
    for (const auto& b : bumps) {
      Vec g = b.profile.grad(x);
      for (Eigen::Index i = 0; i < x.size(); ++i) out[i] += b.amp * g[i];
    }
    return out;
  }
  MatC hess(const Vec& x) const {
    MatC out = MatC::Zero(x.size(), x.size());
    if (grad_num) {
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        Vec xp = x, xm = x;
        xp[j] += kFdStep;
        xm[j] -= kFdStep;
        VecC diff = (grad_num(xp) - grad_num(xm)) / (2.0 * kFdStep);
        for (Eigen::Index i = 0; i < x.size(); ++i) out(i, j) += diff[i];
      }
      return out;
    }
    for (const auto& b : bumps) {
      MatR H = b.profile.hess(x);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        for (Eigen::Index j = 0; j < x.size(); ++j) out(i, j) += b.amp * H(i, j);
    }
    return out;
  }
};

inline GaugeFunction make_gauge_bump(const Vec& center, double radius, cplx amp) {
  detail::check_ball(center, radius);
  GaugeFunction g;
  g.bumps.push_back({BumpProfile{center, radius}, amp});
  g.support_radius = center.norm() + radius;
  return g;
}

// (A, q) -> (A + grad f, q). The boundary data of the associated evolution
// is unchanged; interior fields pick up the factor e^{-if}.
inline FieldSpec gauge_transform(const FieldSpec& spec, const GaugeFunction& g) {
  if (spec.form != Form::Magnetic) throw error("gauge transform expects magnetic form");
  if (g.support_radius > 1.0 + 1e-12) throw error("support leaves unit ball");
  FieldSpec out = spec;
  VectorExtra extra;
  extra.val = [g](const Vec& x) { return g.grad(x); };
  extra.jac = [g](const Vec& x) { return g.hess(x); };
  out.vec_extras.push_back(std::move(extra));
  out.support_radius = std::max(out.support_radius, g.support_radius);
  return out;
}

enum class CertKind { IntegralZero, Antisymmetric, OrthogonalSym };

struct SymmetryCert {
  CertKind kind;
  int j = -1;       // axis index for IntegralZero / OrthogonalSym
  MatR transform;   // O_j for OrthogonalSym
  double residual = 0.0;
};

namespace detail {

template <class F>
void for_each_grid_point(int n, double step, const F& f) {
  int m = static_cast<int>(std::lround(2.0 / step)) + 1;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = -1.0 + idx[static_cast<std::size_t>(d)] * step;
    f(x);
    int d = 0;
    while (d < n) {
      if (++idx[static_cast<std::size_t>(d)] < m) break;
      idx[static_cast<std::size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }
}

inline cplx line_integral_component(const FieldSpec& spec, int axis, const Vec& x_perp,
                                    double tol = 1e-9) {
  double r = std::max(spec.support_radius, 1e-6);
  auto integrand = [&](double s) {
    Vec x(spec.n);
    int k = 0;
    for (int d = 0; d < spec.n; ++d) {
      if (d == axis) {
        x[d] = s;
      } else {
        x[d] = x_perp[k++];
      }
    }
    return spec.vector(x)[axis];
  };
  return adaptive_simpson(integrand, -r, r, tol);
}

}  // namespace detail

inline SymmetryCert check_condition(const FieldSpec& spec, CertKind kind, int j = -1,
                                    const MatR* transform = nullptr) {
  SymmetryCert cert;
  cert.kind = kind;
  const double step = 1.0 / 8.0;
  switch (kind) {
    case CertKind::IntegralZero: {
      cert.j = j < 0 ? spec.n - 1 : j;
      double worst = 0.0;
      detail::for_each_grid_point(spec.n - 1 == 0 ? 1 : spec.n - 1, step, [&](const Vec& yp) {
        Vec y = spec.n == 1 ? Vec(Vec::Zero(0)) : Vec(yp);
        if (spec.n > 1 && y.norm() > 1.0) return;
        worst = std::max(worst,
                         std::abs(detail::line_integral_component(spec, cert.j, y)));
      });
      cert.residual = worst;
      break;
    }
    case CertKind::Antisymmetric: {
      double worst = 0.0;
      detail::for_each_grid_point(spec.n, step, [&](const Vec& x) {
        if (x.norm() > 1.0) return;
        worst = std::max(worst, (spec.vector(Vec(-x)) + spec.vector(x)).norm());
      });
      cert.residual = worst;
      break;
    }
    case CertKind::OrthogonalSym: {
      if (transform == nullptr || j < 0)
        throw error("orthogonal symmetry check needs an axis and a transform");
      cert.j = j;
      cert.transform = *transform;
      MatR O = *transform;
      if ((O * O.transpose() - MatR::Identity(spec.n, spec.n)).norm() > 1e-12)
        throw error("transform is not orthogonal");
      Vec ej = Vec::Zero(spec.n);
      ej[j] = 1.0;
      if ((O * ej + ej).norm() > 1e-12) throw error("transform must send e_j to -e_j");
      double worst = 0.0;
      detail::for_each_grid_point(spec.n, step, [&](const Vec& x) {
        if (x.norm() > 1.0) return;
        cplx a = spec.vector(x)[j];
        cplx b = spec.vector(Vec(O * x))[j];
        worst = std::max(worst, std::abs(a + b));
      });
      cert.residual = worst;
      break;
    }
  }
  return cert;
}

// Remove the e_n component of A by the compactly supported gauge function
// f(x) = int_{-inf}^{x_n} (e_n.A)(x', s) ds. Requires the zero-line-integral
// normalization; otherwise f fails to vanish downstream and the construction
// is rejected.
inline std::pair<FieldSpec, GaugeFunction> gauge_fix_nth(const FieldSpec& spec) {
  if (spec.form != Form::Magnetic) throw error("gauge fixing expects magnetic form");
  SymmetryCert cert = check_condition(spec, CertKind::IntegralZero, spec.n - 1);
  if (cert.residual > 1e-7) throw error("gauge fixing not compactly supported");

  const int axis = spec.n - 1;
  const double r = std::max(spec.support_radius, 1e-6);
  auto f_num = [spec, axis, r](const Vec& x) -> cplx {
    if (x[axis] <= -r) return {0.0, 0.0};
    double hi = std::min(x[axis], r);
    auto integrand = [&](double s) {
      Vec p = x;
      p[axis] = s;
      return spec.vector(p)[axis];
    };
    return adaptive_simpson(integrand, -r, hi, 1e-10);
  };
  auto grad_num = [spec, axis, r](const Vec& x) -> VecC {
    VecC g = VecC::Zero(spec.n);
    g[axis] = spec.vector(x)[axis];
    if (x[axis] <= -r) return g;
    double hi = std::min(x[axis], r);
    for (int i = 0; i < spec.n; ++i) {
      if (i == axis) continue;
      auto integrand = [&](double s) {
        Vec p = x;
        p[axis] = s;
        return spec.vector_jac(p)(axis, i);
      };
      g[i] = adaptive_simpson(integrand, -r, hi, 1e-10);
    }
    return g;
  };

  GaugeFunction g;
  g.support_radius = spec.support_radius;
  g.f_num = f_num;
  g.grad_num = grad_num;

  FieldSpec out = spec;
  VectorExtra extra;
  extra.val = [grad_num](const Vec& x) { return VecC(-grad_num(x)); };
  out.vec_extras.push_back(std::move(extra));
  return {std::move(out), std::move(g)};
}

// mu_j(y) = int_R (e_j . W)(y with s inserted at axis j) ds.
inline std::function<cplx(const Vec&)> mu_profile(const FieldSpec& spec, int j) {
  if (spec.form != Form::Drift) throw error("mu profile expects drift form");
  if (j < 0 || j >= spec.n) throw error("axis out of range");
  return [spec, j](const Vec& y) { return detail::line_integral_component(spec, j, y); };
}

// ---------------------------------------------------------------------------
// Serialization: structured text listing bump parameters; decimal fields are
// printed with 17 significant digits so parsing reproduces doubles exactly.

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string serialize_field(const FieldSpec& spec) {
  if (!spec.pure_bumps())
    throw error("field is not serializable: non-bump components present");
  std::ostringstream os;
  os << "pwlab-field 1\n";
  os << "form " << (spec.form == Form::Magnetic ? "magnetic" : "drift") << "\n";
  os << "n " << spec.n << "\n";
  os << "smoothness " << spec.smoothness << "\n";
  for (const auto& b : spec.vec_bumps) {
    os << "vector-bump center";
    for (int d = 0; d < spec.n; ++d) os << ' ' << detail::fmt17(b.profile.center[d]);
    os << " radius " << detail::fmt17(b.profile.radius) << " amp";
    for (int d = 0; d < spec.n; ++d)
      os << ' ' << detail::fmt17(b.amp[d].real()) << ' ' << detail::fmt17(b.amp[d].imag());
    os << "\n";
  }
  for (const auto& b : spec.scal_bumps) {
    os << "scalar-bump center";
    for (int d = 0; d < spec.n; ++d) os << ' ' << detail::fmt17(b.profile.center[d]);
    os << " radius " << detail::fmt17(b.profile.radius) << " amp "
       << detail::fmt17(b.amp.real()) << ' ' << detail::fmt17(b.amp.imag()) << "\n";
  }
  os << "end\n";
  return os.str();
}

inline FieldSpec parse_field(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  FieldSpec spec;
  bool header = false, done = false;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw error("field parse error at line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (!header) {
      int version = 0;
      if (tag != "pwlab-field" || !(ls >> version) || version != 1)
        fail("expected 'pwlab-field 1' header");
      header = true;
      continue;
    }
    if (tag == "form") {
      std::string f;
      ls >> f;
      if (f == "magnetic") spec.form = Form::Magnetic;
      else if (f == "drift") spec.form = Form::Drift;
      else fail("unknown form '" + f + "'");
    } else if (tag == "n") {
      if (!(ls >> spec.n) || spec.n < 1 || spec.n > 3) fail("bad dimension");
    } else if (tag == "smoothness") {
      ls >> spec.smoothness;
    } else if (tag == "vector-bump" || tag == "scalar-bump") {
      std::string kw;
      ls >> kw;
      if (kw != "center") fail("expected 'center'");
      Vec c(spec.n);
      for (int d = 0; d < spec.n; ++d)
        if (!(ls >> c[d])) fail("bad center");
      ls >> kw;
      double r;
      if (kw != "radius" || !(ls >> r)) fail("expected 'radius'");
      ls >> kw;
      if (kw != "amp") fail("expected 'amp'");
      detail::check_ball(c, r);
      if (tag == "vector-bump") {
        VecC amp(spec.n);
        for (int d = 0; d < spec.n; ++d) {
          double re, im;
          if (!(ls >> re >> im)) fail("bad amplitude");
          amp[d] = {re, im};
        }
        spec.vec_bumps.push_back({BumpProfile{c, r}, amp});
      } else {
        double re, im;
        if (!(ls >> re >> im)) fail("bad amplitude");
        spec.scal_bumps.push_back({BumpProfile{c, r}, cplx{re, im}});
      }
      spec.support_radius = std::max(spec.support_radius, c.norm() + r);
    } else if (tag == "end") {
      done = true;
      break;
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!header || !done) throw error("field parse error: truncated document");
  return spec;
}

}  // namespace pwlab
