#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <random>

#include "rns/spectral.hpp"
#include "support.hpp"

using namespace rns;
using namespace rns::test;
using Catch::Approx;

TEST_CASE("round trip through physical space") {
  for (int d : {2, 3}) {
    Grid g{d, d == 2 ? 32 : 16};
    Field f = random_field(g, 1, g.N / 2 - 1, 7);
    Field back = from_phys(to_phys(f, padded_size(g.N)), g.N);
    CHECK(max_abs(back - f) < 1e-13);
  }
}

TEST_CASE("coefficient convention matches the Fourier series") {
  Grid g{2, 16};
  Field f = sample(g, 0, [](double x, double y, double) { return std::vector<double>{std::cos(3 * x - 2 * y)}; });
  CHECK(std::abs(f.coeff({3, -2, 0}) - cplx(0.5)) < 1e-14);
  CHECK(std::abs(f.coeff({-3, 2, 0}) - cplx(0.5)) < 1e-14);
  f.set_coeff({1, -4, 0}, 0, cplx(0.0, 2.0));
  CHECK(std::abs(f.coeff({-1, 4, 0}) - cplx(0.0, -2.0)) < 1e-15);
}

TEST_CASE("derivatives of trigonometric fields") {
  Grid g{2, 32};
  Field f = sample(g, 0, [](double x, double y, double) { return std::vector<double>{std::sin(2 * x) * std::cos(y)}; });
  Field gx = sample(g, 0, [](double x, double y, double) { return std::vector<double>{2 * std::cos(2 * x) * std::cos(y)}; });
  Field gf = grad(f);
  CHECK(max_abs(component(gf, 0) - gx) < 1e-13);
  CHECK(max_abs(lap(f) + 5.0 * f) < 1e-13);
  CHECK(max_abs(inv_lap(lap(f)) - f) < 1e-13);
}

TEST_CASE("Leray projection is an orthogonal projection onto divergence-free fields") {
  for (int d : {2, 3}) {
    Grid g{d, d == 2 ? 32 : 16};
    Field u = random_field(g, 1, g.N / 2 - 1, 11);
    Field pu = leray(u);
    CHECK(max_abs(div(pu)) < 1e-12);
    CHECK(max_abs(leray(pu) - pu) < 1e-13);
    Field q = u - pu;
    CHECK(std::abs(inner(q, pu)) < 1e-10 * l2(u) * l2(u));
  }
}

TEST_CASE("dealiased product equals the truncated convolution") {
  Grid g{2, 8};
  Field a = random_field(g, 0, 3, 3), b = random_field(g, 0, 3, 4);
  Field ab = scalar_times(a, b);
  double err = 0.0;
  for (int k0 = -3; k0 <= 3; ++k0)
    for (int k1 = -3; k1 <= 3; ++k1) {
      cplx s = 0.0;
      for (int p0 = -3; p0 <= 3; ++p0)
        for (int p1 = -3; p1 <= 3; ++p1) {
          int q0 = k0 - p0, q1 = k1 - p1;
          if (std::abs(q0) > 3 || std::abs(q1) > 3) continue;
          s += a.coeff({p0, p1, 0}) * b.coeff({q0, q1, 0});
        }
      err = std::max(err, std::abs(s - ab.coeff({k0, k1, 0})));
    }
  CHECK(err < 1e-14);
}

TEST_CASE("norms against closed forms") {
  Grid g{2, 32};
  Field f = sample(g, 0, [](double x, double, double) { return std::vector<double>{std::sin(x)}; });
  const double l2exact = kPi * std::sqrt(2.0);
  CHECK(l2(f) == Approx(l2exact).epsilon(1e-13));
  CHECK(lq(f, 2.0) == Approx(l2exact).epsilon(1e-12));
  CHECK(lq(f, kInf) == Approx(1.0).epsilon(1e-12));
  // int |sin x| dx dy = 4 * 2 pi
  CHECK(lq(f, 1.0, 8) == Approx(8.0 * kPi).epsilon(1e-4));
  CHECK(wsr(f, 1.0, 2.0) == Approx(std::sqrt(2.0) * l2exact).epsilon(1e-13));
  CHECK(wsr(f, -1.0, 2.0) == Approx(l2exact / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(cn(f, 1) == Approx(2.0).epsilon(1e-10));
  CHECK(cn(f, 2) == Approx(3.0).epsilon(1e-10));
}

TEST_CASE("bump transform matches a direct quadrature") {
  // Independent oracle: tensor midpoint rule of the 2D bump against cos(xi x).
  auto direct = [](double xi) {
    const int n = 1200;
    double h = 2.0 / n, s = 0.0, m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = -1 + (i + 0.5) * h, y = -1 + (j + 0.5) * h, r2 = x * x + y * y;
        if (r2 >= 1) continue;
        double b = std::exp(-1.0 / (1.0 - r2));
        s += b * std::cos(xi * x);
        m += b;
      }
    return s / m;
  };
  for (double xi : {0.0, 1.0, 5.0, 20.0}) CHECK(bump_hat(2, xi) == Approx(direct(xi)).margin(2e-6));
  CHECK(bump_hat(3, 0.0) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("time mollifier is causal and normalized") {
  auto w = time_mollifier(1.0 / 64, 1.0 / 512);
  REQUIRE(w.size() == 9);
  CHECK(w[0] == 0.0);
  double s = 0.0;
  for (double x : w) s += x;
  CHECK(s == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(time_mollifier(1.0 / 600, 1.0 / 512));
}

TEST_CASE("window norms") {
  const double dt = 1.0 / 64;
  std::vector<double> v(129);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = 1.0 + n * dt;
  // int_0^1 (1+t)^2 dt = 7/3
  CHECK(window_norm(v, dt, 0.0, 2.0) == Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-4));
  CHECK(window_norm(v, dt, 1.0, kInf) == Approx(3.0));
  CHECK(window_norm(v, dt, 0.0, 1.0) == Approx(1.5).epsilon(1e-14));
  CHECK_THROWS(window_norm(v, dt, 1.01, 1.0));
}

TEST_CASE("binary field files round trip") {
  Grid g{3, 8};
  Field f = random_field(g, 2, 3, 5);
  const char* path = "test_spectral_roundtrip.rnsf";
  write_field(path, f, 0.25);
  double t = 0;
  Field h = read_field(path, &t);
  std::remove(path);
  CHECK(t == 0.25);
  CHECK(h.rank == 2);
  CHECK(max_abs(h - f) == 0.0);
}

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]) / x.size(), my += std::log(y[i]) / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("improved Holder gap") {
  Grid g{2, 256};
  auto one = sample(g, 0, [](double, double, double) { return std::vector<double>{1.0}; });
  auto a = sample(g, 0, [](double x, double, double) { return std::vector<double>{1.0 + 0.5 * std::sin(x)}; });
  auto f = sample(g, 0, [](double x, double, double) { return std::vector<double>{std::sin(x)}; });
  CHECK(improved_holder_gap(one, f, 8, 2.0).gap < 1e-12);
  CHECK(improved_holder_gap(a, one, 8, 1.0).gap < 1e-12);
  // Trigonometric polynomials decouple exactly once sigma exceeds the band of a^2.
  for (int s : {4, 8, 16, 32}) CHECK(improved_holder_gap(a, f, s, 2.0).gap < 1e-11);
  CHECK_THROWS(improved_holder_gap(a, f, 200, 2.0));

  // An amplitude with an algebraic Fourier tail gives a measurable gap.
  auto tail = sample(g, 0, [](double x, double y, double) {
    double s = 1.0;
    for (int m = 1; m <= 20; ++m) s += 0.3 * std::cos(m * (x + y)) / (m * m);
    return std::vector<double>{s};
  });
  auto pos = sample(g, 0, [](double x, double y, double) { return std::vector<double>{2.0 + std::cos(x + y)}; });
  for (double p : {1.0, 2.0}) {
    std::vector<double> sig, gap;
    for (int s : {4, 8, 16, 32}) {
      HolderGap h = improved_holder_gap(tail, pos, s, p);
      CHECK(h.gap <= h.bound);
      sig.push_back(s);
      gap.push_back(h.gap);
    }
    CHECK(slope(sig, gap) <= -1.0 / p + 0.1);
  }
}
