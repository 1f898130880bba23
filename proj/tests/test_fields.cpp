#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "pwlab/fields.hpp"

using namespace pwlab;

namespace {

// A = (0, d/dx1 of a bump): zero line integrals along axis 1 by construction.
FieldSpec make_exact_gradient_component(double radius) {
  BumpProfile prof{make_vec({0.0, 0.0}), radius};
  VectorExtra extra;
  extra.val = [prof](const Vec& x) {
    VecC v = VecC::Zero(2);
    v[1] = prof.grad(x)[1];
    return v;
  };
  extra.jac = [prof](const Vec& x) {
    MatC j = MatC::Zero(2, 2);
    MatR h = prof.hess(x);
    j(1, 0) = h(1, 0);
    j(1, 1) = h(1, 1);
    return j;
  };
  FieldSpec spec;
  spec.form = Form::Magnetic;
  spec.n = 2;
  spec.support_radius = radius;
  spec.vec_extras.push_back(std::move(extra));
  return spec;
}

}  // namespace

TEST_CASE("bump potentials evaluate the standard profile", "[fields]") {
  Vec c = make_vec({0.2, -0.1});
  FieldSpec spec = make_bump_potential(2, {c}, {0.5}, {cplx{2.0, 1.0}});
  CHECK(spec.n == 2);
  CHECK(spec.form == Form::Drift);
  CHECK(spec.support_radius == Catch::Approx(c.norm() + 0.5));
  CHECK(std::abs(spec.scalar(c) - cplx{2.0, 1.0} * std::exp(-1.0)) < 1e-14);
  CHECK(spec.scalar(make_vec({0.8, -0.1})) == cplx{});
  CHECK(spec.scalar(make_vec({0.9, 0.9})) == cplx{});
  CHECK(spec.vector(c).norm() == 0.0);

  CHECK_THROWS_AS(make_bump_potential(2, {c}, {0.5, 0.6}, {cplx{1.0, 0.0}}), error);
  // support must stay inside the unit ball
  CHECK_THROWS_AS(make_bump_potential(2, {make_vec({0.8, 0.0})}, {0.5}, {cplx{1.0, 0.0}}),
                  error);
}

TEST_CASE("bump derivatives match finite differences", "[fields]") {
  BumpProfile prof{make_vec({0.1, -0.2}), 0.6};
  const double fd = 1e-6;
  for (const Vec& x : {make_vec({0.2, 0.0}), make_vec({-0.1, -0.35}), make_vec({0.4, 0.1})}) {
    Vec g = prof.grad(x);
    MatR h = prof.hess(x);
    double lap = prof.laplacian(x);
    for (int d = 0; d < 2; ++d) {
      Vec xp = x, xm = x;
      xp[d] += fd;
      xm[d] -= fd;
      CHECK(g[d] == Catch::Approx((prof.value(xp) - prof.value(xm)) / (2.0 * fd))
                        .margin(1e-6));
      for (int e = 0; e < 2; ++e) {
        CHECK(h(d, e) ==
              Catch::Approx((prof.grad(xp)[e] - prof.grad(xm)[e]) / (2.0 * fd)).margin(1e-6));
      }
    }
    CHECK(lap == Catch::Approx(h.trace()).margin(1e-12));
  }
  CHECK(prof.grad(make_vec({0.9, 0.9})).norm() == 0.0);
  CHECK(prof.laplacian(make_vec({0.9, 0.9})) == 0.0);
}

TEST_CASE("rotational fields are divergence free and antisymmetric", "[fields]") {
  FieldSpec rot = make_rotational_field(2, 0.7, 0.8);
  CHECK_THROWS_AS(make_rotational_field(1, 0.7, 0.8), error);
  for (const Vec& x : {make_vec({0.3, 0.2}), make_vec({-0.5, 0.1}), make_vec({0.0, 0.6})}) {
    CHECK(std::abs(rot.divergence(x)) < 1e-12);
    CHECK((rot.vector(Vec(-x)) + rot.vector(x)).norm() < 1e-14);
    // analytic jacobian against finite differences of the values
    MatC j = rot.vector_jac(x);
    for (int d = 0; d < 2; ++d) {
      Vec xp = x, xm = x;
      xp[d] += 1e-6;
      xm[d] -= 1e-6;
      VecC diff = (rot.vector(xp) - rot.vector(xm)) / 2e-6;
      for (int i = 0; i < 2; ++i) CHECK(std::abs(j(i, d) - diff[i]) < 1e-6);
    }
    // analytic laplacian against finite differences
    VecC lap = rot.vector_lap(x);
    VecC acc = VecC::Zero(2);
    for (int d = 0; d < 2; ++d) {
      Vec xp = x, xm = x;
      xp[d] += 1e-4;
      xm[d] -= 1e-4;
      acc += (rot.vector(xp) - 2.0 * rot.vector(x) + rot.vector(xm)) / 1e-8;
    }
    CHECK((lap - acc).norm() < 1e-5);
  }
  CHECK(rot.vector(make_vec({0.9, 0.3})).norm() == 0.0);
}

TEST_CASE("form conversion implements the drift substitution", "[fields]") {
  FieldSpec mag = make_bump_potential(
      2, {make_vec({0.1, 0.0})}, {0.6}, {VecC(make_vec({0.5, -0.3}).cast<cplx>())},
      Form::Magnetic);
  FieldSpec q = make_bump_potential(2, {make_vec({-0.1, 0.1})}, {0.5}, {cplx{0.4, 0.2}},
                                    Form::Magnetic);
  mag = merge_parts(std::move(mag), q);

  FieldSpec drift = convert_form(mag);
  CHECK(drift.form == Form::Drift);
  const cplx unit_i{0.0, 1.0};
  for (const Vec& x : {make_vec({0.2, 0.1}), make_vec({-0.15, 0.05}), make_vec({0.0, 0.3})}) {
    // W = -iA
    CHECK((drift.vector(x) - VecC(-unit_i * mag.vector(x))).norm() < 1e-14);
    // V = q + A.A - i div A, divergence checked by independent differences
    VecC a = mag.vector(x);
    cplx a2 = a[0] * a[0] + a[1] * a[1];
    cplx div{};
    for (int d = 0; d < 2; ++d) {
      Vec xp = x, xm = x;
      xp[d] += 1e-6;
      xm[d] -= 1e-6;
      div += (mag.vector(xp)[d] - mag.vector(xm)[d]) / 2e-6;
    }
    CHECK(std::abs(drift.scalar(x) - (mag.scalar(x) + a2 - unit_i * div)) < 1e-6);
  }

  // round trip restores both parts
  FieldSpec back = convert_form(drift);
  CHECK(back.form == Form::Magnetic);
  for (const Vec& x : {make_vec({0.2, 0.1}), make_vec({-0.3, 0.2})}) {
    CHECK((back.vector(x) - mag.vector(x)).norm() < 1e-13);
    CHECK(std::abs(back.scalar(x) - mag.scalar(x)) < 1e-12);
  }
}

TEST_CASE("gauge transforms shift the vector part by a gradient", "[fields]") {
  FieldSpec mag = make_bump_potential(
      2, {make_vec({0.0, 0.1})}, {0.5}, {VecC(make_vec({0.3, 0.2}).cast<cplx>())},
      Form::Magnetic);
  GaugeFunction g = make_gauge_bump(make_vec({-0.1, 0.0}), 0.6, cplx{0.0, 0.25});
  FieldSpec shifted = gauge_transform(mag, g);

  for (const Vec& x : {make_vec({0.15, 0.2}), make_vec({-0.4, 0.1}), make_vec({0.0, 0.0})}) {
    CHECK((shifted.vector(x) - (mag.vector(x) + g.grad(x))).norm() < 1e-14);
    CHECK(shifted.scalar(x) == mag.scalar(x));  // scalar part untouched
  }
  // the drift forms differ by exactly -i grad g
  FieldSpec d0 = convert_form(mag);
  FieldSpec d1 = convert_form(shifted);
  Vec x = make_vec({0.1, 0.05});
  CHECK((d1.vector(x) - d0.vector(x) - VecC(cplx{0.0, -1.0} * g.grad(x))).norm() < 1e-13);

  CHECK_THROWS_AS(gauge_transform(convert_form(mag), g), error);
  CHECK_THROWS_AS(make_gauge_bump(make_vec({0.7, 0.0}), 0.5, cplx{1.0, 0.0}), error);

  // gradient and hessian of the gauge bump against finite differences
  Vec y = make_vec({0.05, -0.1});
  VecC gg = g.grad(y);
  MatC gh = g.hess(y);
  for (int d = 0; d < 2; ++d) {
    Vec yp = y, ym = y;
    yp[d] += 1e-6;
    ym[d] -= 1e-6;
    CHECK(std::abs(gg[d] - (g.f(yp) - g.f(ym)) / 2e-6) < 1e-7);
    for (int e = 0; e < 2; ++e)
      CHECK(std::abs(gh(e, d) - (g.grad(yp)[e] - g.grad(ym)[e]) / 2e-6) < 1e-6);
  }
}

TEST_CASE("symmetry certificates detect their conditions", "[fields]") {
  FieldSpec rot = make_rotational_field(2, 0.5, 0.7);
  CHECK(check_condition(rot, CertKind::Antisymmetric).residual < 1e-12);

  // constant-direction bump is even, not antisymmetric
  FieldSpec even = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5},
                                       {VecC(make_vec({1.0, 0.0}).cast<cplx>())});
  CHECK(check_condition(even, CertKind::Antisymmetric).residual > 0.1);

  // zero last component passes the line-integral test trivially
  SymmetryCert cz = check_condition(even, CertKind::IntegralZero);
  CHECK(cz.j == 1);
  CHECK(cz.residual < 1e-12);
  // nonzero last component with even profile fails it
  FieldSpec bad = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5},
                                      {VecC(make_vec({0.0, 1.0}).cast<cplx>())});
  CHECK(check_condition(bad, CertKind::IntegralZero).residual > 0.05);
  // exact-derivative component integrates to zero along its axis
  FieldSpec grad2 = make_exact_gradient_component(0.6);
  CHECK(check_condition(grad2, CertKind::IntegralZero).residual < 1e-9);

  // reflection symmetry about the x1 axis
  MatR refl = MatR::Identity(2, 2);
  refl(1, 1) = -1.0;
  SymmetryCert co = check_condition(grad2, CertKind::OrthogonalSym, 1, &refl);
  CHECK(co.residual < 1e-12);
  CHECK_THROWS_AS(check_condition(grad2, CertKind::OrthogonalSym, 1, nullptr), error);
  MatR skew = MatR::Identity(2, 2);
  skew(0, 1) = 0.5;
  CHECK_THROWS_AS(check_condition(grad2, CertKind::OrthogonalSym, 1, &skew), error);
  MatR wrong_axis = MatR::Identity(2, 2);
  wrong_axis(0, 0) = -1.0;
  CHECK_THROWS_AS(check_condition(grad2, CertKind::OrthogonalSym, 1, &wrong_axis), error);
}

TEST_CASE("gauge fixing removes the last vector component", "[fields]") {
  FieldSpec spec = make_exact_gradient_component(0.6);
  auto [fixed, g] = gauge_fix_nth(spec);
  BumpProfile prof{make_vec({0.0, 0.0}), 0.6};
  for (const Vec& x : {make_vec({0.1, 0.2}), make_vec({-0.3, -0.1}), make_vec({0.2, 0.55})}) {
    CHECK(std::abs(fixed.vector(x)[1]) < 1e-8);
    // f recovers the bump the component was differentiated from
    CHECK(std::abs(g.f(x) - prof.value(x)) < 1e-8);
  }
  // downstream of the support the gauge function has returned to zero
  CHECK(std::abs(g.f(make_vec({0.0, 0.9}))) < 1e-9);

  FieldSpec bad = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5},
                                      {VecC(make_vec({0.0, 1.0}).cast<cplx>())},
                                      Form::Magnetic);
  CHECK_THROWS_AS(gauge_fix_nth(bad), error);
  CHECK_THROWS_AS(gauge_fix_nth(convert_form(bad)), error);
}

TEST_CASE("mu profiles integrate vector components along rays", "[fields]") {
  const cplx amp{0.8, -0.2};
  FieldSpec drift;
  drift.form = Form::Drift;
  drift.n = 2;
  drift.support_radius = 0.6;
  drift.vec_bumps.push_back(
      {BumpProfile{make_vec({0.0, 0.0}), 0.6}, VecC(amp * Vec::Unit(2, 0).cast<cplx>())});

  auto mu0 = mu_profile(drift, 0);
  BumpProfile prof{make_vec({0.0, 0.0}), 0.6};
  for (double y : {0.0, 0.2, -0.35}) {
    cplx expected = amp * adaptive_simpson(
                              [&](double s) { return prof.value(make_vec({s, y})); },
                              -0.6, 0.6, 1e-11);
    cplx got = mu0(make_vec({y}));
    CHECK(std::abs(got - expected) < 1e-9);
  }
  auto mu1 = mu_profile(drift, 1);
  CHECK(std::abs(mu1(make_vec({0.1}))) < 1e-12);

  CHECK_THROWS_AS(mu_profile(drift, 2), error);
  FieldSpec mag = drift;
  mag.form = Form::Magnetic;
  CHECK_THROWS_AS(mu_profile(mag, 0), error);
}

TEST_CASE("field serialization round-trips bit exactly", "[fields]") {
  FieldSpec spec = make_bump_potential(
      2, {make_vec({0.1, -0.2}), make_vec({-0.05, 0.0})}, {0.3, 1.0 / 3.0},
      {cplx{std::sqrt(2.0), -0.125}, cplx{0.0, std::numbers::pi / 7.0}});
  FieldSpec withvec = make_bump_potential(2, {make_vec({0.0, 0.1})}, {0.4},
                                          {VecC(make_vec({0.25, -0.75}).cast<cplx>())});
  spec = merge_parts(std::move(spec), withvec);

  FieldSpec copy = parse_field(serialize_field(spec));
  CHECK(copy.form == spec.form);
  CHECK(copy.n == spec.n);
  REQUIRE(copy.scal_bumps.size() == spec.scal_bumps.size());
  REQUIRE(copy.vec_bumps.size() == spec.vec_bumps.size());
  for (std::size_t k = 0; k < spec.scal_bumps.size(); ++k) {
    CHECK(copy.scal_bumps[k].amp == spec.scal_bumps[k].amp);
    CHECK(copy.scal_bumps[k].profile.radius == spec.scal_bumps[k].profile.radius);
    CHECK((copy.scal_bumps[k].profile.center - spec.scal_bumps[k].profile.center).norm() ==
          0.0);
  }
  for (std::size_t k = 0; k < spec.vec_bumps.size(); ++k)
    CHECK((copy.vec_bumps[k].amp - spec.vec_bumps[k].amp).norm() == 0.0);

  CHECK_THROWS_AS(serialize_field(make_rotational_field(2, 1.0, 0.5)), error);
  CHECK_THROWS_AS(parse_field("pwlab-field 2\nend\n"), error);
  CHECK_THROWS_AS(parse_field("pwlab-field 1\nform drift\n"), error);  // truncated
  CHECK_THROWS_AS(parse_field("pwlab-field 1\nbogus 3\nend\n"), error);
  CHECK_THROWS_AS(parse_field("pwlab-field 1\nn 7\nend\n"), error);
}

TEST_CASE("regularity indices follow the dimension parity rule", "[fields]") {
  RegularityIndex r1 = regularity_index(1);
  CHECK(r1.N == 4);
  CHECK(r1.M == 13);
  RegularityIndex r2 = regularity_index(2);
  CHECK(r2.N == 4);
  CHECK(r2.M == 13);
  RegularityIndex r3 = regularity_index(3);
  CHECK(r3.N == 5);
  CHECK(r3.M == 16);
}
