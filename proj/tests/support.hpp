#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rns/spectral.hpp"

namespace rns::test {

inline Field random_field(Grid g, int rank, int K, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Field f(g, rank);
  Phys p(g.d, g.N, rank);
  for (auto& c : p.v)
    for (auto& x : c) x = n01(rng);
  return truncate_box(from_phys(p, g.N), K);
}

inline Field sample(Grid g, int rank, const std::function<std::vector<double>(double, double, double)>& fn) {
  Phys p(g.d, g.N, rank);
  const int N = g.N;
  const double h = 2.0 * kPi / N;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double x[3] = {0, 0, 0};
    std::size_t r = i;
    for (int a = g.d - 1; a >= 0; --a) {
      x[a] = h * static_cast<double>(r % N);
      r /= N;
    }
    auto v = fn(x[0], x[1], x[2]);
    for (int c = 0; c < p.ncomp(); ++c) p.v[c][i] = v[c];
  }
  return from_phys(p, N);
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (auto& c : f.c) m = std::max(m, std::abs(c));
  return m;
}
inline Field mean_free(Field f) {
  for (int c = 0; c < f.ncomp(); ++c) f.comp(c)[0] = 0.0;
  return f;
}

}  // namespace rns::test
