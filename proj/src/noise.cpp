#include "rns/noise.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace rns {

namespace {

double sphere_area(int d) { return d == 2 ? 2.0 * kPi : 4.0 * kPi; }

// Runs f(i) for i in [0, n) on a fixed partition; results must be stored by index.
template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) f(i);
    });
  for (auto& t : pool) t.join();
}

void mean_stderr(const std::vector<double>& v, double& mean, double& se) {
  const double n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= std::max(n - 1.0, 1.0);
  se = std::sqrt(var / n);
}

}  // namespace

double NoiseSpectrum::g(double k2) const { return amp * std::pow(1.0 + k2, -0.5 * beta); }

double NoiseSpectrum::trace() const { return trace_weighted(0.0); }

double NoiseSpectrum::trace_weighted(double lambda) const {
  NoiseModes m = noise_modes(*this);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += 2.0 * m.g[i] * m.g[i] * std::pow(1.0 + m.k2[i], lambda);
  return s;
}

double NoiseSpectrum::tail_bound() const {
  if (2.0 * beta <= d) return kInf;
  boost::math::quadrature::exp_sinh<double> q;
  const double K0 = K;
  double v = q.integrate([&](double r) { return std::pow(K0 + r, d - 1) * std::pow(1.0 + (K0 + r) * (K0 + r), -beta); });
  return (d - 1) * sphere_area(d) * amp * amp * v;
}

double default_beta(int d) { return d - 0.4; }

NoiseModes noise_modes(const NoiseSpectrum& s) {
  NoiseModes m;
  m.d = s.d;
  const int K = s.K;
  auto canonical = [&](const Wave& k) {
    for (int a = s.d - 1; a >= 0; --a)
      if (k[a] != 0) return k[a] > 0;
    return false;
  };
  auto add = [&](const Wave& k, std::array<double, 3> p) {
    double k2 = 0.0;
    for (int a = 0; a < s.d; ++a) k2 += double(k[a]) * k[a];
    m.k.push_back(k);
    m.pol.push_back(p);
    m.k2.push_back(k2);
    m.g.push_back(s.g(k2));
  };
  Wave k{0, 0, 0};
  const int zr = s.d == 3 ? K : 0;
  for (k[2] = -zr; k[2] <= zr; ++k[2])
    for (k[1] = -K; k[1] <= K; ++k[1])
      for (k[0] = -K; k[0] <= K; ++k[0]) {
        if (!canonical(k)) continue;
        double len = 0.0;
        for (int a = 0; a < s.d; ++a) len += double(k[a]) * k[a];
        len = std::sqrt(len);
        if (s.d == 2) {
          add(k, {-k[1] / len, k[0] / len, 0.0});
          continue;
        }
        std::array<double, 3> u{k[0] / len, k[1] / len, k[2] / len};
        int ax = 0;
        for (int a = 1; a < 3; ++a)
          if (std::abs(u[a]) < std::abs(u[ax])) ax = a;
        std::array<double, 3> p1{0, 0, 0};
        p1[ax] = 1.0;
        double dot = u[ax];
        for (int a = 0; a < 3; ++a) p1[a] -= dot * u[a];
        double n1 = std::sqrt(p1[0] * p1[0] + p1[1] * p1[1] + p1[2] * p1[2]);
        for (double& x : p1) x /= n1;
        std::array<double, 3> p2{u[1] * p1[2] - u[2] * p1[1], u[2] * p1[0] - u[0] * p1[2], u[0] * p1[1] - u[1] * p1[0]};
        add(k, p1);
        add(k, p2);
      }
  return m;
}

Field modal_field(const NoiseModes& m, const std::vector<double>& x, const Grid& g) {
  Field f(g, 1);
  const double c = std::sqrt(2.0 / g.volume());
  for (std::size_t j = 0; j < m.size(); ++j) {
    for (int a = 0; a < g.d; ++a)
      if (std::abs(m.k[j][a]) > g.N / 2 - 1) throw std::invalid_argument("noise band exceeds the grid");
    const cplx z = 0.5 * c * cplx(x[2 * j], -x[2 * j + 1]);
    for (int a = 0; a < g.d; ++a) {
      if (m.pol[j][a] == 0.0) continue;
      f.set_coeff(m.k[j], a, f.coeff(m.k[j], a) + m.pol[j][a] * z);
    }
  }
  return f;
}

std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t sample, std::uint64_t frame) {
  // splitmix64 finalizer chained over the three keys
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return std::mt19937_64(mix(mix(mix(seed) ^ sample) ^ frame));
}

OUStep ou_step(double lambda, double dt) {
  OUStep s;
  s.a = std::exp(-lambda * dt);
  s.b = lambda > 0.0 ? std::sqrt(-std::expm1(-2.0 * lambda * dt) / (2.0 * lambda)) : std::sqrt(dt);
  return s;
}

std::vector<std::vector<double>> sample_modal_path(const NoiseModes& m, int nu, double dt, int steps,
                                                   std::uint64_t seed, std::uint64_t sample) {
  std::vector<OUStep> st(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) st[j] = ou_step(nu * m.k2[j] + 1.0, dt);
  std::vector<std::vector<double>> x(steps + 1, std::vector<double>(2 * m.size(), 0.0));
  std::normal_distribution<double> n01;
  for (int n = 0; n < steps; ++n) {
    auto rng = frame_rng(seed, sample, n);
    for (std::size_t j = 0; j < m.size(); ++j)
      for (int c = 0; c < 2; ++c) x[n + 1][2 * j + c] = st[j].a * x[n][2 * j + c] + st[j].b * m.g[j] * n01(rng);
  }
  return x;
}

Path sample_z_path(const Field& u0, const NoiseSpectrum& s, double T, double dt, std::uint64_t seed, int nu,
                   std::uint64_t sample) {
  if (u0.rank != 1 || u0.g.d != s.d) throw std::invalid_argument("initial datum must be a vector field of matching dimension");
  const int steps = static_cast<int>(std::lround(T / dt));
  NoiseModes m = noise_modes(s);
  auto x = sample_modal_path(m, nu, dt, steps, seed, sample);
  Path p;
  p.dt = dt;
  for (int n = 0; n <= steps; ++n) {
    const double t = n * dt;
    Field f = apply_multiplier(u0, [&](const Wave&, double k2) { return std::exp(-(nu * k2 + 1.0) * t); });
    f += modal_field(m, x[n], u0.g);
    p.f.push_back(std::move(f));
  }
  return p;
}

MomentTable estimate_convolution_moments(const NoiseSpectrum& s, double delta, double m, int S, int samples,
                                         double dt, std::uint64_t seed, int nu, int workers) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2)");
  const int per = static_cast<int>(std::lround(1.0 / dt));
  if (std::abs(per * dt - 1.0) > 1e-12) throw std::invalid_argument("dt must divide the unit window");
  NoiseModes modes = noise_modes(s);
  const double alpha = 0.5 - delta;
  std::vector<std::vector<double>> vals(S + 1, std::vector<double>(samples, 0.0));
  parallel_for(samples, workers, [&](int i) {
    auto x = sample_modal_path(modes, nu, dt, (S + 1) * per, seed, i);
    const std::size_t D = x[0].size();
    for (int w = 0; w <= S; ++w) {
      double sup = 0.0, hol = 0.0;
      for (int a = w * per; a <= (w + 1) * per; ++a) {
        double n2 = 0.0;
        for (double v : x[a]) n2 += v * v;
        sup = std::max(sup, std::sqrt(n2));
        for (int b = a + 1; b <= (w + 1) * per; ++b) {
          double d2 = 0.0;
          for (std::size_t j = 0; j < D; ++j) {
            double e = x[b][j] - x[a][j];
            d2 += e * e;
          }
          hol = std::max(hol, std::sqrt(d2) / std::pow((b - a) * dt, alpha));
        }
      }
      vals[w][i] = std::pow(sup + hol, m);
    }
  });
  MomentTable t;
  double lo = kInf, hi = 0.0;
  for (int w = 0; w <= S; ++w) {
    MomentRow r;
    r.s = w;
    r.m = m;
    mean_stderr(vals[w], r.estimate, r.stderr_);
    lo = std::min(lo, r.estimate);
    hi = std::max(hi, r.estimate);
    t.rows.push_back(r);
  }
  t.flatness = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : kInf);
  return t;
}

std::vector<MollifierRow> mollification_error(const NoiseSpectrum& s, const std::vector<double>& ells, double window_s,
                                              int samples, double dt, std::uint64_t seed, int workers) {
  NoiseModes modes = noise_modes(s);
  const int first = static_cast<int>(std::lround(window_s / dt));
  const int per = static_cast<int>(std::lround(1.0 / dt));
  const int steps = first + per;
  std::vector<std::vector<double>> w(ells.size()), sm(ells.size());
  for (std::size_t e = 0; e < ells.size(); ++e) {
    w[e] = time_mollifier(ells[e], dt);
    for (std::size_t j = 0; j < modes.size(); ++j) sm[e].push_back(bump_hat(s.d, ells[e] * std::sqrt(modes.k2[j])));
  }
  std::vector<std::vector<double>> err(ells.size(), std::vector<double>(samples, 0.0));
  parallel_for(samples, workers, [&](int i) {
    auto x = sample_modal_path(modes, 1, dt, steps, seed, i);
    const std::size_t D = x[0].size();
    for (std::size_t e = 0; e < ells.size(); ++e) {
      double acc = 0.0;
      for (int n = first; n <= steps; ++n) {
        double e2 = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
          double zl = 0.0;
          for (std::size_t q = 0; q < w[e].size(); ++q) zl += w[e][q] * x[std::max(n - static_cast<int>(q), 0)][j];
          zl *= sm[e][j / 2];
          double diff = x[n][j] - zl;
          e2 += diff * diff;
        }
        acc += (n == first || n == steps ? 0.5 : 1.0) * e2 * dt;
      }
      err[e][i] = acc;
    }
  });
  std::vector<MollifierRow> out;
  for (std::size_t e = 0; e < ells.size(); ++e) {
    double mean, se;
    mean_stderr(err[e], mean, se);
    MollifierRow r;
    r.ell = ells[e];
    r.estimate = std::sqrt(mean);
    r.stderr_ = mean > 0.0 ? se / (2.0 * r.estimate) : 0.0;
    out.push_back(r);
  }
  return out;
}

HeatDecayReport heat_decay_check(const Field& u0, double p1, double dt) {
  HeatDecayReport r;
  const double n0 = lq(u0, p1);
  const int d = u0.g.d;
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int n = 1; n <= steps; ++n) {
    const double t = n * dt;
    double v = 0.0;
    if (n0 > 0.0) {
      Field u = apply_multiplier(u0, [t](const Wave&, double k2) { return std::exp(-(k2 + 1.0) * t); });
      v = lq(u, kInf) * std::exp(0.5 * t) * std::pow(t, d / (2.0 * p1)) / n0;
    }
    r.t.push_back(t);
    r.value.push_back(v);
    r.sup = std::max(r.sup, v);
  }
  return r;
}

void write_moments_csv(const std::string& file, const MomentTable& t) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(17);
  out << "s,m,estimate,stderr\n";
  for (const auto& r : t.rows) out << r.s << ',' << r.m << ',' << r.estimate << ',' << r.stderr_ << '\n';
}

}  // namespace rns
