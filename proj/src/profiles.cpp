#include "rns/profiles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rns {

namespace {

using boost::math::quadrature::gauss;

double raw(double t) { return t > 0.0 && t < 1.0 ? std::exp(-1.0 / (t * (1.0 - t))) : 0.0; }

struct Table {
  static constexpr int cells = 2048;
  double scale = 0.0;  // squared normalization
  std::vector<double> cum;

  Table() : cum(cells + 1, 0.0) {
    auto sq = [](double t) { return raw(t) * raw(t); };
    for (int i = 0; i < cells; ++i)
      cum[i + 1] = cum[i] + gauss<double, 15>::integrate(sq, double(i) / cells, double(i + 1) / cells);
    scale = 1.0 / cum[cells];
    for (double& c : cum) c *= scale;
  }
};

const Table& table() {
  static const Table t;
  return t;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

double base_g(double t) { return std::sqrt(table().scale) * raw(t); }

double base_G(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const Table& tb = table();
  const int i = std::min(static_cast<int>(x * Table::cells), Table::cells - 1);
  const double a = double(i) / Table::cells;
  double part = gauss<double, 15>::integrate([](double t) { return raw(t) * raw(t); }, a, x);
  return tb.cum[i] + tb.scale * part;
}

double TemporalProfile::g(double t) const { return std::sqrt(kappa) * base_g(kappa * frac(varsigma * t)); }

double TemporalProfile::h(double t) const {
  const double f = frac(varsigma * t);
  return base_G(std::min(kappa * f, 1.0)) - f;
}

double TemporalProfile::ghat_sq(double t, double dt) const {
  return std::max(1.0 + (H(t + dt) - H(t - dt)) / (2.0 * dt), 0.0);
}

SampledProfile build_g(double kappa, int varsigma, double dt, double T) {
  if (varsigma < 1) throw std::invalid_argument("oscillation must be a positive integer");
  if (kappa < 1.0) throw std::invalid_argument("concentration must be at least 1");
  if (kappa * varsigma * dt > 1.0 / 16.0) throw std::invalid_argument("temporal concentration unresolved");
  SampledProfile s;
  s.p = TemporalProfile{kappa, varsigma};
  s.dt = dt;
  const long n = std::lround(T / dt);
  for (long i = 0; i <= n; ++i) {
    double t = dt * i;
    s.t.push_back(t);
    s.g.push_back(s.p.g(t));
    s.h.push_back(s.p.h(t));
  }
  return s;
}

double smoothstep(double x, int order) {
  if (x <= 0.0 || x >= 1.0) return order == 0 && x >= 1.0 ? 1.0 : 0.0;
  auto f = [](double y) { return std::exp(-1.0 / y); };
  auto f1 = [&](double y) { return f(y) / (y * y); };
  auto f2 = [&](double y) { return f(y) * (1.0 - 2.0 * y) / (y * y * y * y); };
  const double u = f(x), w = f(1.0 - x), s = u + w;
  if (order == 0) return u / s;
  const double u1 = f1(x), w1 = -f1(1.0 - x);
  const double num = u1 * w - u * w1;
  if (order == 1) return num / (s * s);
  const double u2 = f2(x), w2 = f2(1.0 - x);
  const double num1 = u2 * w - u * w2;
  return (num1 * s - 2.0 * num * (u1 + w1)) / (s * s * s);
}

double TimeCutoff::value(double t, int order) const {
  const double a = 0.5 * std::sqrt(ell);
  return smoothstep((t - a) / a, order) / std::pow(a, order);
}

TimeCutoff build_cutoff(double ell, double dt) {
  if (!(ell > 0.0 && ell < 1.0)) throw std::invalid_argument("mollification scale must lie in (0,1)");
  if (0.5 * std::sqrt(ell) < 4.0 * dt) throw std::invalid_argument("time cutoff ramp unresolved");
  TimeCutoff c;
  c.ell = ell;
  const double a = 0.5 * std::sqrt(ell);
  for (int i = 1; i < 4096; ++i) {
    double t = a + a * i / 4096.0;
    c.C1 = std::max(c.C1, std::abs(c.value(t, 1)) * std::sqrt(ell));
    c.C2 = std::max(c.C2, std::abs(c.value(t, 2)) * ell);
  }
  return c;
}

void write_profiles_csv(const std::string& file, const SampledProfile& s, const TimeCutoff& c) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(17);
  out << "t,g,h,theta\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) out << s.t[i] << ',' << s.g[i] << ',' << s.h[i] << ',' << c(s.t[i]) << '\n';
}

}  // namespace rns
