#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "pwlab/traces.hpp"
#include "pwlab/wavesolver.hpp"

using namespace pwlab;

namespace {

FieldSpec scalar_1d(double amp = 0.5) {
  return make_bump_potential(1, {make_vec({0.0})}, {0.5}, {cplx{amp, 0.0}});
}

TraceRequest sphere_request(int n) { return TraceRequest{sample_boundary_circle(n, 0.7)}; }

BoundaryTrace run_1d(const FieldSpec& spec, IncidentKind kind, double h,
                     BoundaryRule bc = BoundaryRule::Dirichlet) {
  const double eps = 4.0 * h;
  SimGrid grid(1, h, 5.0, -1.0 - 2.0 * eps, 2.0);
  Direction omega(make_vec({1.0}));
  return run(spec, omega, MollifiedIncident(kind, eps), grid, sphere_request(1), bc).trace;
}

}  // namespace

TEST_CASE("free space leaves the scattered field at zero", "[wavesolver]") {
  FieldSpec none;
  none.n = 1;
  for (IncidentKind kind : {IncidentKind::Heaviside, IncidentKind::Delta}) {
    BoundaryTrace tr = run_1d(none, kind, 1.0 / 32.0);
    std::size_t bad = 0;
    for (const cplx& v : tr.values) bad += v != cplx{};
    CHECK(bad == 0);
  }
}

TEST_CASE("incident source vanishes without a potential", "[wavesolver]") {
  FieldSpec none;
  none.n = 2;
  Direction omega(make_vec({0.0, 1.0}));
  MollifiedIncident inc(IncidentKind::Delta, 0.125);
  CHECK(incident_source(none, omega, inc, make_vec({0.3, -0.2}), 0.1) == cplx{});

  // scalar potential drives -V delta for the spike and -V H for the step
  FieldSpec v = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5}, {cplx{0.7, 0.1}});
  Vec x = make_vec({0.1, 0.2});
  const double t = 0.25;
  const double s = t - omega.vec().dot(x);
  cplx vd = incident_source(v, omega, inc, x, t);
  CHECK(std::abs(vd - (-v.scalar(x) * inc.delta(s))) < 1e-15);
  MollifiedIncident inch(IncidentKind::Heaviside, 0.125);
  cplx vh = incident_source(v, omega, inch, x, t);
  CHECK(std::abs(vh - (-v.scalar(x) * inch.heaviside(s))) < 1e-15);

  // vector potential couples through omega
  FieldSpec w = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5},
                                    {VecC(make_vec({0.3, -0.4}).cast<cplx>())});
  cplx wd = incident_source(w, omega, inc, x, t);
  VecC wx = w.vector(x);
  cplx wdo = omega.vec()[0] * wx[0] + omega.vec()[1] * wx[1];
  CHECK(std::abs(wd - 2.0 * wdo * inc.delta_prime(s)) < 1e-13);
}

TEST_CASE("solver enforces construction invariants", "[wavesolver]") {
  FieldSpec v2 = make_bump_potential(2, {make_vec({0.0, 0.0})}, {0.5}, {cplx{1.0, 0.0}});
  SimGrid g1(1, 1.0 / 16.0, 5.0, -1.5, 2.0);
  Direction o1(make_vec({1.0}));
  MollifiedIncident inc(IncidentKind::Heaviside, 0.25);
  CHECK_THROWS_AS(WaveSolver(v2, Direction(make_vec({1.0, 0.0})), inc, g1), error);

  WaveSolver solver(scalar_1d(), o1, inc, g1);
  CHECK(solver.step_index() == 0);
  CHECK(solver.time() == g1.t0);
  solver.step();
  CHECK(solver.step_index() == 1);
  CHECK(solver.time() == Catch::Approx(g1.t0 + g1.dt));
  CHECK_THROWS_AS(solver.set_state({}, {}, 3), error);

  // the run driver rejects windows that start inside the incident layer
  SimGrid late(1, 1.0 / 16.0, 5.0, -1.0, 2.0);
  CHECK_THROWS_AS(
      run(scalar_1d(), o1, inc, late, sphere_request(1)), error);
}

TEST_CASE("magnetic and drift inputs integrate identically", "[wavesolver]") {
  FieldSpec mag = make_bump_potential(1, {make_vec({0.1})}, {0.4},
                                      {VecC(make_vec({0.5}).cast<cplx>())}, Form::Magnetic);
  FieldSpec drift = convert_form(mag);
  const double h = 1.0 / 32.0;
  const double eps = 4.0 * h;
  SimGrid grid(1, h, 5.0, -1.0 - 2.0 * eps, 2.0);
  Direction omega(make_vec({1.0}));
  MollifiedIncident inc(IncidentKind::Heaviside, eps);
  BoundaryTrace a = run(mag, omega, inc, grid, sphere_request(1)).trace;
  BoundaryTrace b = run(drift, omega, inc, grid, sphere_request(1)).trace;
  REQUIRE(a.values.size() == b.values.size());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) bad += a.values[i] != b.values[i];
  CHECK(bad == 0);
}

TEST_CASE("scattered waves respect causality", "[wavesolver]") {
  for (IncidentKind kind : {IncidentKind::Heaviside, IncidentKind::Delta}) {
    BoundaryTrace tr = run_1d(scalar_1d(), kind, 1.0 / 64.0);
    CHECK(causality_violation(tr, 4.0) < 1e-5);
  }
}

TEST_CASE("traces converge under grid refinement", "[wavesolver]") {
  // the same physical signal sampled at three resolutions; the paired
  // comparison form contracts at least linearly between levels
  BoundaryTrace c = run_1d(scalar_1d(), IncidentKind::Heaviside, 1.0 / 32.0);
  BoundaryTrace m = run_1d(scalar_1d(), IncidentKind::Heaviside, 1.0 / 64.0);
  BoundaryTrace f = run_1d(scalar_1d(), IncidentKind::Heaviside, 1.0 / 128.0);
  const double d0 = discrepancy(comparison_form(c), comparison_form(m), TraceNorm::Linf);
  const double d1 = discrepancy(comparison_form(m), comparison_form(f), TraceNorm::Linf);
  CAPTURE(d0, d1);
  CHECK(d1 < 0.5 * d0);
  CHECK(d0 < 0.1);
}

TEST_CASE("boundary conditions pin the box edge", "[wavesolver]") {
  const double h = 1.0 / 32.0;
  SimGrid grid(1, h, 5.0, -1.5, 2.0);
  Direction omega(make_vec({1.0}));
  MollifiedIncident inc(IncidentKind::Heaviside, 4.0 * h);
  WaveSolver solver(scalar_1d(), omega, inc, grid);
  for (int k = 0; k < grid.step_count(); ++k) solver.step();
  const auto& u = solver.u_curr();
  CHECK(u.front() == cplx{});
  CHECK(u.back() == cplx{});
}

TEST_CASE("snapshots round-trip bit exactly", "[wavesolver]") {
  const double h = 1.0 / 32.0;
  SimGrid grid(1, h, 5.0, -1.5, 2.0);
  Direction omega(make_vec({1.0}));
  MollifiedIncident inc(IncidentKind::Heaviside, 4.0 * h);
  WaveSolver solver(scalar_1d(), omega, inc, grid);
  for (int k = 0; k < 60; ++k) solver.step();
  WaveState st = solver.state();

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "pwlab_test_snapshot.bin";
  write_snapshot(st, path);
  Snapshot back = read_snapshot(path);
  CHECK(back.n == grid.n);
  CHECK(back.m == solver.layout().m);
  CHECK(back.h == grid.h);
  CHECK(back.t == st.t);
  REQUIRE(back.values.size() == st.u_curr.size());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < back.values.size(); ++i) bad += back.values[i] != st.u_curr[i];
  CHECK(bad == 0);
  fs::remove(path);

  CHECK_THROWS_AS(read_snapshot(fs::temp_directory_path() / "pwlab_no_such.bin"), error);
}
