#include <catch_amalgamated.hpp>

#include <cmath>

#include "rns/antidiv.hpp"
#include "support.hpp"

using namespace rns;
using namespace rns::test;

TEST_CASE("R on a single mode matches the symbol") {
  Grid g{2, 32};
  Field v = sample(g, 1, [](double, double y, double) { return std::vector<double>{std::sin(y), 0.0}; });
  Field Rv = apply_R(v);
  // k = (0,1), v^1 = -i/2, k.v = 0: only the symmetric gradient part survives.
  CHECK(std::abs(Rv.coeff({0, 1, 0}, 1) - cplx(-0.5)) < 1e-14);
  CHECK(std::abs(Rv.coeff({0, 1, 0}, 2) - cplx(-0.5)) < 1e-14);
  CHECK(std::abs(Rv.coeff({0, 1, 0}, 0)) < 1e-14);
  CHECK(std::abs(Rv.coeff({0, 1, 0}, 3)) < 1e-14);
  CHECK(l2(div(Rv) - v) < 1e-12);
}

TEST_CASE("R annihilates constants and the mean") {
  Grid g{2, 32};
  Field c = sample(g, 1, [](double, double, double) { return std::vector<double>{1.5, -2.0}; });
  CHECK(l2(apply_R(c)) == 0.0);
  Field v = random_field(g, 1, 8, 4);
  CHECK(l2(apply_R(v + c) - apply_R(v)) < 1e-12 * l2(apply_R(v)));
  Field w = random_field(g, 1, 8, 5);
  CHECK(l2(apply_R(2.0 * v + w) - 2.0 * apply_R(v) - apply_R(w)) < 1e-13 * l2(apply_R(v)));
}

TEST_CASE("identities over a random sweep") {
  for (int d : {2, 3}) {
    for (int N : {64, 128}) {
      if (d == 3 && N == 128) continue;
      const int cases = d == 2 ? 50 : 10;
      for (int s = 0; s < cases; ++s) {
        Grid g{d, d == 3 ? 32 : N};
        Field v = random_field(g, 1, g.N / 4, 100 * N + s);
        Field M = mean_free(random_field(g, 2, g.N / 4, 100 * N + s + 50));
        v *= 1.0 / l2(v);
        M *= 1.0 / l2(M);
        AntiDivReport r = check_antidiv(v, M);
        CHECK(r.div_R <= 1e-11);
        CHECK(r.trace_R <= 1e-12);
        CHECK(r.sym_R <= 1e-14);
        CHECK(r.R_lap <= 1e-10);
        CHECK(r.div_B <= 1e-10);
      }
    }
  }
}

TEST_CASE("B examples") {
  Grid g{2, 64};
  Field zero(g, 1);
  Field M = sample(g, 2, [](double, double y, double) {
    double c = std::cos(2 * y);
    return std::vector<double>{0.5 * c, 0.0, 0.0, -0.5 * c};
  });
  CHECK(l2(apply_B(zero, M)) == 0.0);

  Field cst = sample(g, 1, [](double, double, double) { return std::vector<double>{0.7, -0.2}; });
  Field Mv(g, 1);
  set_component(Mv, 0, 0.7 * component(M, 0) - 0.2 * component(M, 1));
  set_component(Mv, 1, 0.7 * component(M, 2) - 0.2 * component(M, 3));
  CHECK(l2(div(apply_B(cst, M)) - Mv) < 1e-13);

  Field v = sample(g, 1, [](double x, double, double) { return std::vector<double>{std::sin(x), 0.0}; });
  CHECK(check_antidiv(v, M).div_B <= 1e-10);

  Field bad = M;
  bad.comp(0)[0] = 0.1;
  CHECK_THROWS(apply_B(v, bad));
}

TEST_CASE("R gains one power of the oscillation") {
  Grid g{2, 128};
  Field f = mean_free(random_field(g, 1, 3, 9));
  std::vector<double> ls, ln;
  for (int s : {2, 4, 8, 16}) {
    double n = lq(apply_R(rescale(f, s, g.N, 3)), 1.0);
    ls.push_back(std::log(s));
    ln.push_back(std::log(n));
  }
  double mx = 0, my = 0;
  for (int i = 0; i < 4; ++i) mx += ls[i] / 4, my += ln[i] / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) sxy += (ls[i] - mx) * (ln[i] - my), sxx += (ls[i] - mx) * (ls[i] - mx);
  CHECK(std::abs(sxy / sxx + 1.0) <= 0.05);
}
