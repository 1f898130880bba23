#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "pwlab/common.hpp"
#include "pwlab/interp.hpp"
#include "pwlab/mollifier.hpp"
#include "pwlab/quadrature.hpp"

using namespace pwlab;

TEST_CASE("adaptive simpson hits closed forms", "[numerics]") {
  auto sq = [](double x) { return x * x; };
  CHECK(adaptive_simpson(sq, 0.0, 1.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        Catch::Approx(2.0).epsilon(1e-10));
  CHECK(adaptive_simpson(sq, 0.5, 0.5) == 0.0);

  cplx val = adaptive_simpson([](double x) { return std::exp(cplx{0.0, x}); }, 0.0, 1.0);
  CHECK(val.real() == Catch::Approx(std::sin(1.0)).epsilon(1e-10));
  CHECK(val.imag() == Catch::Approx(1.0 - std::cos(1.0)).epsilon(1e-10));
}

TEST_CASE("trapezoid rules are exact on linear data", "[numerics]") {
  const double dx = 0.1;
  std::vector<double> f(11);
  for (int i = 0; i <= 10; ++i) f[static_cast<std::size_t>(i)] = 2.0 * (i * dx) + 1.0;
  CHECK(trapezoid<double>(f, dx) == Catch::Approx(2.0).epsilon(1e-14));

  std::vector<double> cum;
  cumulative_trapezoid<double>(f, dx, cum);
  REQUIRE(cum.size() == f.size());
  CHECK(cum[0] == 0.0);
  for (int i = 0; i <= 10; ++i) {
    const double x = i * dx;
    CHECK(cum[static_cast<std::size_t>(i)] == Catch::Approx(x * x + x).margin(1e-14));
  }
}

namespace {
double cumulative_simpson_error(int k) {
  const double dx = 2.0 / (k - 1);
  std::vector<double> f(static_cast<std::size_t>(k)), out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) f[static_cast<std::size_t>(i)] = std::sin(i * dx);
  cumulative_simpson<double>(f, dx, out);
  double worst = 0.0;
  for (int i = 0; i < k; ++i)
    worst = std::max(worst, std::abs(out[static_cast<std::size_t>(i)] -
                                     (1.0 - std::cos(i * dx))));
  return worst;
}
}  // namespace

TEST_CASE("cumulative simpson is fourth order", "[numerics]") {
  // exact on parabolas
  const double dx = 0.25;
  std::vector<double> f(9), out(9);
  for (int i = 0; i < 9; ++i) f[static_cast<std::size_t>(i)] = (i * dx) * (i * dx);
  cumulative_simpson<double>(f, dx, out);
  for (int i = 0; i < 9; ++i) {
    const double x = i * dx;
    CHECK(out[static_cast<std::size_t>(i)] == Catch::Approx(x * x * x / 3.0).margin(1e-14));
  }

  const double coarse = cumulative_simpson_error(33);
  const double fine = cumulative_simpson_error(65);
  CHECK(fine < coarse / 12.0);

  std::vector<double> wrong(8);
  CHECK_THROWS_AS(cumulative_simpson<double>(f, dx, wrong), error);
}

TEST_CASE("unit mollifier mass matches the reference value", "[numerics]") {
  // 1 / int_{-1}^{1} exp(1/(u^2-1)) du, thirty digits from an independent
  // multi-precision evaluation.
  const double recip = 2.25228362104358101;
  CHECK(unit_delta(0.0) == Catch::Approx(std::exp(-1.0) * recip).margin(1e-13));
  CHECK(unit_delta(1.0) == 0.0);
  CHECK(unit_delta(-1.0) == 0.0);
  CHECK(unit_delta(2.5) == 0.0);
  CHECK(unit_delta(0.4) == unit_delta(-0.4));

  CHECK(adaptive_simpson([](double u) { return unit_delta(u); }, -1.0, 1.0, 1e-12) ==
        Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("unit heaviside is the mollifier antiderivative", "[numerics]") {
  CHECK(unit_heaviside(-1.0) == 0.0);
  CHECK(unit_heaviside(-3.0) == 0.0);
  CHECK(unit_heaviside(1.0) == 1.0);
  CHECK(unit_heaviside(4.0) == 1.0);
  CHECK(unit_heaviside(0.0) == Catch::Approx(0.5).margin(1e-12));
  // independent multi-precision value of H(0.3)
  CHECK(unit_heaviside(0.3) == Catch::Approx(0.74090797464380798).margin(1e-12));

  double prev = 0.0;
  for (int i = 0; i <= 40; ++i) {
    double u = -1.0 + 0.05 * i;
    double v = unit_heaviside(u);
    CHECK(v >= prev - 1e-15);
    CHECK(v == Catch::Approx(adaptive_simpson([](double s) { return unit_delta(s); },
                                              -1.0, u, 1e-12))
                   .margin(1e-10));
    prev = v;
  }
}

TEST_CASE("mollifier derivative matches finite differences", "[numerics]") {
  for (double u : {-0.7, -0.2, 0.0, 0.35, 0.9}) {
    CHECK(unit_delta_prime(u) == Catch::Approx(-unit_delta_prime(-u)).margin(1e-12));
    const double fd = (unit_delta(u + 1e-6) - unit_delta(u - 1e-6)) / 2e-6;
    CHECK(unit_delta_prime(u) == Catch::Approx(fd).margin(1e-6));
  }
  CHECK(unit_delta_prime(0.0) == 0.0);
  CHECK(unit_delta_prime(1.5) == 0.0);
}

TEST_CASE("mollified incident scales the unit profile", "[numerics]") {
  CHECK_THROWS_AS(MollifiedIncident(IncidentKind::Delta, 0.0), error);
  CHECK_THROWS_AS(MollifiedIncident(IncidentKind::Delta, -0.1), error);

  const double eps = 1.0 / 16.0;
  MollifiedIncident d(IncidentKind::Delta, eps);
  MollifiedIncident h(IncidentKind::Heaviside, eps);
  CHECK(d.delta(0.0) == Catch::Approx(unit_delta(0.0) / eps));
  CHECK(d.mass() == Catch::Approx(1.0).margin(1e-10));
  CHECK(h.heaviside(eps) == 1.0);
  CHECK(h.heaviside(-eps) == 0.0);
  CHECK(d.profile(0.0) == d.delta(0.0));
  CHECK(h.profile(0.0) == h.heaviside(0.0));
  const double fd = (d.delta(0.01 + 1e-7) - d.delta(0.01 - 1e-7)) / 2e-7;
  CHECK(d.delta_prime(0.01) == Catch::Approx(fd).margin(1e-4));
}

TEST_CASE("pairwise summation agrees with sequential", "[numerics]") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = u(rng);
  const double seq = std::accumulate(xs.begin(), xs.end(), 0.0);
  CHECK(pairwise_sum(xs) == Catch::Approx(seq).margin(1e-11));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{4.5}) == 4.5);
  // same association order every call
  CHECK(pairwise_sum(xs) == pairwise_sum(xs));

  std::vector<cplx> zs(257);
  for (auto& z : zs) z = cplx{u(rng), u(rng)};
  cplx zseq = std::accumulate(zs.begin(), zs.end(), cplx{});
  CHECK(std::abs(pairwise_sum(zs) - zseq) < 1e-11);
}

TEST_CASE("hashes are deterministic", "[numerics]") {
  CHECK(fnv1a("abc") == fnv1a("abc"));
  CHECK(fnv1a("abc") != fnv1a("abd"));
  CHECK(fnv1a("") != fnv1a(" "));
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(fnv1a("x")).size() == 16);
}

TEST_CASE("cubic weights form a partition of unity", "[numerics]") {
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    auto w = detail::cubic_weights(s);
    CHECK(w[0] + w[1] + w[2] + w[3] == Catch::Approx(1.0).margin(1e-14));
    // reproduce the cubic x^3 on offsets {-1,0,1,2}
    double v = w[0] * (-1.0) + w[1] * 0.0 + w[2] * 1.0 + w[3] * 8.0;
    CHECK(v == Catch::Approx(s * s * s).margin(1e-13));
  }
  CHECK(detail::cubic_weights(0.0)[1] == 1.0);
}

TEST_CASE("grid interpolation reproduces cubics exactly", "[numerics]") {
  SimGrid g(2, 0.125, 5.0, -1.25, 3.0);
  GridLayout lay = GridLayout::of(g);
  std::vector<cplx> vals(lay.size());
  auto f = [](const Vec& x) {
    return cplx{x[0] * x[0] * x[0] - 2.0 * x[1] * x[1], x[0] * x[1]};
  };
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::array<int, 3> idx = lay.unflat(i);
    vals[i] = f(lay.point(idx));
  }
  for (const Vec& x : {make_vec({0.31, -0.77}), make_vec({1.03, 2.4}), make_vec({-3.2, 0.01})}) {
    CHECK(std::abs(interpolate<cplx>(lay, vals, x) - f(x)) < 1e-10);
  }
  // targets whose stencil would leave the grid are rejected
  CHECK_THROWS_AS(interpolate<cplx>(lay, vals, make_vec({5.0, 0.0})), error);
}

TEST_CASE("layout flattening round-trips", "[numerics]") {
  SimGrid g(3, 0.5, 5.0, -1.25, 3.0);
  GridLayout lay = GridLayout::of(g);
  REQUIRE(lay.size() == static_cast<std::size_t>(lay.m) * lay.m * lay.m);
  for (std::size_t k : {std::size_t{0}, std::size_t{7}, lay.size() - 1}) {
    CHECK(lay.flat(lay.unflat(k)) == k);
  }
  CHECK(lay.coord(0) == -lay.L);
  CHECK(lay.coord(lay.m - 1) == Catch::Approx(lay.L));
}

TEST_CASE("parallel loops are thread-count invariant", "[numerics]") {
  const int saved = max_threads();
  std::vector<double> data(5000);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::sin(0.001 * i);

  auto reduce = [&]() {
    std::vector<double> sq(data.size());
    detail::parallel_for(data.size(), [&](std::size_t i) { sq[i] = data[i] * data[i]; });
    return pairwise_sum(sq);
  };
  set_max_threads(1);
  const double r1 = reduce();
  set_max_threads(8);
  const double r8 = reduce();
  set_max_threads(saved);
  CHECK(r1 == r8);  // bitwise: same association order either way
}
