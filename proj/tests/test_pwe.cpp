#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "pwlab/pwe.hpp"

using namespace pwlab;

namespace {

FieldSpec vector_bump_field(Form form = Form::Drift) {
  return make_bump_potential(2, {make_vec({0.1, 0.0})}, {0.5},
                             {VecC(make_vec({0.4, 0.2}).cast<cplx>())}, form);
}

FieldSpec scalar_bump_field() {
  return make_bump_potential(2, {make_vec({0.0, 0.1})}, {0.5}, {cplx{0.6, -0.3}});
}

std::vector<Vec> probe_points() {
  return {make_vec({0.3, 0.1}), make_vec({0.55, -0.2}), make_vec({0.8, 0.0}),
          make_vec({0.2, 0.35})};
}

}  // namespace

TEST_CASE("free space expansions are trivial", "[pwe]") {
  FieldSpec none;
  none.n = 2;
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 16.0, 1.5);

  ExpansionTable del = expand(none, omega, grid, 2, WaveKind::Delta);
  ExpansionTable hea = expand(none, omega, grid, 2, WaveKind::Heaviside);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < del.psi.size(); ++i) {
    bad += del.psi[i] != cplx{};
    bad += del.a(-1)[i] != cplx{1.0, 0.0};
    bad += del.a(0)[i] != cplx{};
    bad += del.a(1)[i] != cplx{};
    bad += del.a(2)[i] != cplx{};
    bad += hea.a(-1)[i] != cplx{};
    bad += hea.a(0)[i] != cplx{1.0, 0.0};
    bad += hea.a(1)[i] != cplx{};
    bad += hea.a(2)[i] != cplx{};
  }
  CHECK(bad == 0);

  CHECK_THROWS_AS(expand(none, omega, grid, 3, WaveKind::Delta), error);
  CHECK_THROWS_AS(expand(none, omega, grid, -1, WaveKind::Delta), error);
  CHECK_THROWS_AS(del.a(3), error);
  CHECK_THROWS_AS(del.a(-2), error);
}

TEST_CASE("phase integral matches an independent ray quadrature", "[pwe]") {
  FieldSpec spec = vector_bump_field();
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 32.0, 1.5);
  std::vector<cplx> psi = compute_psi(spec, omega, grid);
  GridLayout lay = GridLayout::of(grid);

  for (const Vec& x : probe_points()) {
    const double z = omega.vec().dot(x);
    const double lo = -(z + spec.support_radius);
    cplx ref = adaptive_simpson(
        [&](double s) {
          Vec p = x + s * omega.vec();
          VecC w = spec.vector(p);
          return cplx{omega.vec()[0] * w[0] + omega.vec()[1] * w[1]};
        },
        lo, 0.0, 1e-12);
    CHECK(std::abs(psi_at(spec, omega, x, ray_spacing(grid, spec)) - ref) < 1e-9);
    CHECK(std::abs(interpolate<cplx>(lay, psi, x) - ref) < 1e-6);
  }

  // upstream of the support every table entry is exactly the seed
  ExpansionTable del = expand(spec, omega, grid, 1, WaveKind::Delta);
  std::size_t bad = 0, seen = 0;
  for (std::size_t i = 0; i < lay.size(); ++i) {
    Vec x = lay.point(lay.unflat(i));
    if (omega.vec().dot(x) + spec.support_radius <= 0.0) {
      ++seen;
      bad += del.psi[i] != cplx{};
      bad += del.a(-1)[i] != cplx{1.0, 0.0};
      bad += del.a(0)[i] != cplx{};
    }
  }
  CHECK(seen > 0);
  CHECK(bad == 0);
}

TEST_CASE("heaviside chain with scalar potential has the ray-integral order one",
          "[pwe]") {
  FieldSpec spec = scalar_bump_field();
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 32.0, 1.5);
  ExpansionTable t = expand(spec, omega, grid, 1, WaveKind::Heaviside);

  // W = 0: no phase, leading profile 1
  std::size_t bad = 0;
  for (std::size_t i = 0; i < t.psi.size(); ++i) {
    bad += t.psi[i] != cplx{};
    bad += t.a(0)[i] != cplx{1.0, 0.0};
  }
  CHECK(bad == 0);

  // a_1 = -(1/2) int of V along the incoming ray
  for (const Vec& x : probe_points()) {
    const double lo = -(omega.vec().dot(x) + spec.support_radius);
    cplx ref = -0.5 * adaptive_simpson(
                          [&](double s) { return spec.scalar(x + s * omega.vec()); }, lo,
                          0.0, 1e-12);
    CHECK(std::abs(eval_coeff(t, 1, x) - ref) < 1e-6);
  }
}

TEST_CASE("phase and leading amplitude ignore the scalar part", "[pwe]") {
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 16.0, 1.5);
  FieldSpec base = vector_bump_field();
  FieldSpec with_v = merge_parts(vector_bump_field(), scalar_bump_field());

  std::vector<cplx> psi0 = compute_psi(base, omega, grid);
  std::vector<cplx> psi1 = compute_psi(with_v, omega, grid);
  REQUIRE(psi0.size() == psi1.size());

  ExpansionTable d0 = expand(base, omega, grid, 0, WaveKind::Delta);
  ExpansionTable d1 = expand(with_v, omega, grid, 0, WaveKind::Delta);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < psi0.size(); ++i) {
    bad += psi0[i] != psi1[i];
    bad += d0.a(-1)[i] != d1.a(-1)[i];
  }
  CHECK(bad == 0);
}

TEST_CASE("the two chains are shifts of each other", "[pwe]") {
  FieldSpec spec = merge_parts(vector_bump_field(), scalar_bump_field());
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 16.0, 1.5);

  ExpansionTable del = expand(spec, omega, grid, 1, WaveKind::Delta);
  ExpansionTable hea = expand(spec, omega, grid, 2, WaveKind::Heaviside);

  REQUIRE(del.a(0).size() == hea.a(1).size());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < del.a(0).size(); ++i) {
    bad += del.a(-1)[i] != hea.a(0)[i];
    bad += del.a(0)[i] != hea.a(1)[i];
    bad += del.a(1)[i] != 2.0 * hea.a(2)[i];
  }
  CHECK(bad == 0);
}

TEST_CASE("transport residuals shrink at second order", "[pwe]") {
  FieldSpec spec = merge_parts(vector_bump_field(), scalar_bump_field());
  Direction omega(make_vec({1.0, 0.0}));
  const std::vector<Vec> pts = probe_points();

  SimGrid coarse = make_table_grid(2, 1.0 / 16.0, 1.5);
  SimGrid fine = make_table_grid(2, 1.0 / 32.0, 1.5);
  ExpansionTable tc = expand(spec, omega, coarse, 1, WaveKind::Delta);
  ExpansionTable tf = expand(spec, omega, fine, 1, WaveKind::Delta);

  for (int order : {-1, 0}) {
    const double rc = transport_residual(tc, spec, order, pts);
    const double rf = transport_residual(tf, spec, order, pts);
    CAPTURE(order, rc, rf);
    CHECK(rf < 0.35 * rc);
  }
  // the seeded level of the heaviside chain obeys the same relation
  ExpansionTable hc = expand(spec, omega, coarse, 0, WaveKind::Heaviside);
  ExpansionTable hf = expand(spec, omega, fine, 0, WaveKind::Heaviside);
  const double hrc = transport_residual(hc, spec, 0, pts);
  const double hrf = transport_residual(hf, spec, 0, pts);
  CAPTURE(hrc, hrf);
  CHECK(hrf < 0.35 * hrc);
}

TEST_CASE("tables evaluate through interpolation", "[pwe]") {
  FieldSpec spec = vector_bump_field();
  Direction omega(make_vec({1.0, 0.0}));
  SimGrid grid = make_table_grid(2, 1.0 / 16.0, 1.5);
  ExpansionTable t = expand(spec, omega, grid, 0, WaveKind::Delta);
  GridLayout lay = GridLayout::of(grid);

  // at a grid node interpolation reproduces the stored value
  std::array<int, 3> idx{20, 18, 0};
  Vec x = lay.point(idx);
  CHECK(std::abs(eval_psi(t, x) - t.psi[lay.flat(idx)]) < 1e-13);
  CHECK(std::abs(eval_coeff(t, -1, x) - t.a(-1)[lay.flat(idx)]) < 1e-13);

  // a(-1) is exactly exp(psi)
  std::size_t bad = 0;
  for (std::size_t i = 0; i < t.psi.size(); ++i) bad += t.a(-1)[i] != std::exp(t.psi[i]);
  CHECK(bad == 0);
}
