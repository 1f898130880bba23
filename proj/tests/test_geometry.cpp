#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pwlab/geometry.hpp"

using namespace pwlab;

TEST_CASE("directions must be unit vectors", "[geometry]") {
  CHECK_NOTHROW(Direction(make_vec({1.0, 0.0})));
  CHECK_THROWS_AS(Direction(make_vec({1.0, 1.0})), error);
  CHECK_THROWS_AS(Direction(make_vec({0.0, 0.0})), error);
  CHECK_THROWS_AS(Direction(Vec::Zero(0)), error);
  CHECK_THROWS_AS(Direction(Vec::Ones(4) / 2.0), error);

  Direction d = Direction::normalized(make_vec({3.0, 4.0}));
  CHECK(d[0] == Catch::Approx(0.6));
  CHECK(d[1] == Catch::Approx(0.8));
  CHECK_THROWS_AS(Direction::normalized(make_vec({0.0, 0.0})), error);
}

TEST_CASE("frames are orthonormal with omega last", "[geometry]") {
  const Vec raw[] = {make_vec({1.0, 0.0}), make_vec({0.0, 1.0}),
                     make_vec({std::sqrt(0.5), std::sqrt(0.5)}),
                     make_vec({0.36, -0.48, 0.8})};
  for (const Vec& v : raw) {
    Direction omega = Direction::normalized(v);
    Frame fr = make_frame(omega);
    const int n = fr.n();
    REQUIRE(fr.basis.cols() == n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        CHECK(fr.basis.col(a).dot(fr.basis.col(b)) ==
              Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
    CHECK((fr.basis.col(n - 1) - omega.vec()).norm() < 1e-14);

    // coords agree with the direct projections and z is the last coordinate
    Vec x = Vec::LinSpaced(n, 0.3, 1.1);
    Vec c = fr.coords(x);
    CHECK(c[n - 1] == Catch::Approx(fr.z(x)));
    CHECK(fr.z(x) == Catch::Approx(omega.vec().dot(x)));
    Vec y = fr.y(x);
    REQUIRE(y.size() == n - 1);
    for (int k = 0; k + 1 < n; ++k) CHECK(y[k] == Catch::Approx(c[k]));
    // reconstruction
    Vec back = Vec::Zero(n);
    for (int k = 0; k < n; ++k) back += c[k] * fr.basis.col(k);
    CHECK((back - x).norm() < 1e-12);
  }
}

TEST_CASE("frame construction is deterministic", "[geometry]") {
  Direction omega = Direction::normalized(make_vec({0.1, 0.2, 0.3}));
  Frame a = make_frame(omega);
  Frame b = make_frame(omega);
  CHECK((a.basis - b.basis).norm() == 0.0);
}

TEST_CASE("space-time regions split along the front", "[geometry]") {
  Direction omega(make_vec({1.0, 0.0}));
  Frame fr = make_frame(omega);
  Region q{RegionKind::Q, 7.5, 1e-9};
  Vec inside = make_vec({0.2, 0.1});
  CHECK(region_contains(q, fr, inside, 0.0));
  CHECK_FALSE(region_contains(q, fr, make_vec({1.2, 0.0}), 0.0));
  CHECK_FALSE(region_contains(q, fr, inside, 8.0));

  Region qp{RegionKind::Qplus, 7.5, 1e-9};
  Region qm{RegionKind::Qminus, 7.5, 1e-9};
  // z = 0.2 here, so t = 1 is behind the front and t = -1 ahead of it
  CHECK(region_contains(qp, fr, inside, 1.0));
  CHECK_FALSE(region_contains(qp, fr, inside, -1.0));
  CHECK(region_contains(qm, fr, inside, -1.0));
  CHECK_FALSE(region_contains(qm, fr, inside, 1.0));

  Region sig{RegionKind::Sigma, 7.5, 1e-9};
  CHECK(region_contains(sig, fr, make_vec({0.0, 1.0}), 0.0));
  CHECK_FALSE(region_contains(sig, fr, inside, 0.0));

  Region gam{RegionKind::Gamma, 7.5, 1e-9};
  CHECK(region_contains(gam, fr, inside, 0.2));  // t = z exactly
  CHECK_FALSE(region_contains(gam, fr, inside, 0.5));

  Region caps{RegionKind::GammaTopBottom, 7.5, 1e-9};
  CHECK(region_contains(caps, fr, inside, 7.5));
  CHECK(region_contains(caps, fr, inside, -7.5));
  CHECK_FALSE(region_contains(caps, fr, inside, 0.0));
}

TEST_CASE("grid defaults and validation", "[geometry]") {
  SimGrid g(2, 1.0 / 32.0, 5.0, -1.25, 3.0);
  CHECK(g.dt == Catch::Approx(0.9 * g.h / std::sqrt(2.0)));
  CHECK(g.points_per_axis() == 321);
  CHECK(g.point_count() == 321u * 321u);
  CHECK(g.coord(0) == Catch::Approx(-5.0));
  CHECK(g.coord(g.points_per_axis() - 1) == Catch::Approx(5.0));
  // extent snaps up to a multiple of h
  SimGrid snapped(1, 0.25, 4.9, -1.25, 3.0);
  CHECK(snapped.extent == Catch::Approx(5.0));

  CHECK_THROWS_AS(SimGrid(0, 0.25, 5.0, -1.25, 3.0), error);
  CHECK_THROWS_AS(SimGrid(4, 0.25, 5.0, -1.25, 3.0), error);
  CHECK_THROWS_AS(SimGrid(2, -0.1, 5.0, -1.25, 3.0), error);
  // CFL: explicit dt above h/sqrt(n) is rejected
  CHECK_THROWS_AS(SimGrid(2, 0.25, 5.0, -1.25, 3.0, 0.2), error);
  CHECK_NOTHROW(SimGrid(2, 0.25, 5.0, -1.25, 3.0, 0.15));
  // causal disconnection: extent must cover 1 + (t1 + 1)
  CHECK_THROWS_AS(SimGrid(2, 0.25, 4.0, -1.25, 3.0), error);
  CHECK_THROWS_AS(SimGrid(2, 0.25, 5.0, 3.0, 3.0), error);
}

TEST_CASE("grid step count covers the window", "[geometry]") {
  SimGrid g(1, 1.0 / 16.0, 5.0, -1.25, 3.0);
  const int steps = g.step_count();
  CHECK(g.t0 + steps * g.dt >= g.t1 - 1e-12);
  CHECK(g.t0 + (steps - 1) * g.dt < g.t1);
}

TEST_CASE("boundary sampling covers the unit sphere", "[geometry]") {
  CHECK_THROWS_AS(sample_boundary_circle(2, 0.0), error);

  auto one = sample_boundary_circle(1, 0.3);
  REQUIRE(one.size() == 2);
  CHECK(one[0].x[0] == 1.0);
  CHECK(one[1].x[0] == -1.0);

  auto two = sample_boundary_circle(2, 0.2);
  CHECK(two.size() ==
        static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / 0.2 - 1e-12)));
  for (const auto& p : two) {
    CHECK(p.x.norm() == Catch::Approx(1.0));
    CHECK(p.x[0] == Catch::Approx(std::cos(p.angle1)).margin(1e-14));
  }
  // first sample sits at angle zero
  CHECK(two[0].x[0] == Catch::Approx(1.0));

  auto three = sample_boundary_circle(3, 0.5);
  CHECK(three.size() >= 6);
  for (const auto& p : three) CHECK(p.x.norm() == Catch::Approx(1.0));
  // deterministic
  auto again = sample_boundary_circle(3, 0.5);
  REQUIRE(again.size() == three.size());
  for (std::size_t i = 0; i < three.size(); ++i)
    CHECK((three[i].x - again[i].x).norm() == 0.0);
}
