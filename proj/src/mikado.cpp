#include "rns/mikado.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rns {

namespace {

double radial_integral(int d) {
  using boost::math::quadrature::gauss;
  double s = 0.0;
  const int panels = 64;
  for (int p = 0; p < panels; ++p) {
    double a = 0.5 + 0.5 * p / panels, b = 0.5 + 0.5 * (p + 1) / panels;
    s += gauss<double, 20>::integrate(
        [d](double r) {
          double v = mikado_psi(d, r);
          return v * v * std::pow(r, d - 2);
        },
        a, b);
  }
  return s;
}

double analytic_constant(int d, double mu, const Wave& k) {
  double len = 0.0;
  for (int a = 0; a < d; ++a) len += static_cast<double>(k[a]) * k[a];
  len = std::sqrt(len);
  const double sphere = d == 2 ? 2.0 : 2.0 * kPi;
  const double tp = 2.0 * kPi;
  double n2 = std::pow(tp, d - 4) * std::pow(mu, 5 - d) * len * sphere * radial_integral(d);
  return 1.0 / std::sqrt(n2);
}

std::string cache_name(const Basis& b, double mu, int N, std::size_t i) {
  std::ostringstream key;
  key.precision(17);
  for (std::size_t j = 0; j < b.size(); ++j)
    key << b.k[j][0] << b.k[j][1] << b.k[j][2] << ":" << b.p[j][0] << "," << b.p[j][1] << "," << b.p[j][2] << ";";
  std::ostringstream name;
  name << "mikado_d" << b.d << "_mu" << mu << "_N" << N << "_L" << std::hex << std::hash<std::string>{}(key.str())
       << std::dec << "_k" << i << ".rnsf";
  return name.str();
}

// Exact Fourier coefficients of mu-concentrated tubes around l_k, restricted to
// the grid. Only modes orthogonal to k are present.
Field exact_potential(const Basis& b, int i, double mu, const Grid& g) {
  using boost::math::quadrature::gauss;
  const Wave& k = b.k[i];
  double len = 0.0;
  for (int a = 0; a < g.d; ++a) len += static_cast<double>(k[a]) * k[a];
  len = std::sqrt(len);
  auto transform = [&](double m) {
    const double w = 2.0 * kPi * m / mu;
    const int panels = 32 + static_cast<int>(w);
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
      double lo = 0.5 + 0.5 * p / panels, hi = 0.5 + 0.5 * (p + 1) / panels;
      s += gauss<double, 20>::integrate(
          [&](double r) {
            return g.d == 2 ? mikado_phi(r) * std::cos(w * r) : mikado_phi(r) * std::cyl_bessel_j(0.0, w * r) * r;
          },
          lo, hi);
    }
    return g.d == 2 ? len * 2.0 / mu * s : len * 2.0 * kPi / (mu * mu) * s;
  };
  Field f(g, 0);
  const auto& mt = modes(g);
  std::map<double, double> cache;
  for (std::size_t j = 0; j < g.nspec(); ++j) {
    if (!mt.active[j]) continue;
    long dot = 0;
    double mp = 0.0;
    for (int a = 0; a < g.d; ++a) {
      dot += static_cast<long>(mt.k[j][a]) * k[a];
      mp += mt.k[j][a] * b.p[i][a];
    }
    if (dot != 0) continue;
    auto it = cache.find(mt.k2[j]);
    if (it == cache.end()) it = cache.emplace(mt.k2[j], transform(std::sqrt(mt.k2[j]))).first;
    f.comp(0)[j] = it->second * std::polar(1.0, -2.0 * kPi * mp);
  }
  return f;
}

void derive(MikadoFamily& fam, std::size_t i, Field phi) {
  const int d = fam.g.d;
  Field psi = lap(phi);
  double n = l2(psi);
  fam.capture[i] = fam.c_analytic[i] * n;
  phi *= 1.0 / n;
  psi *= 1.0 / n;
  Field W(fam.g, 1);
  for (int a = 0; a < d; ++a) {
    Field s = psi;
    s *= fam.basis.e[i][a];
    set_component(W, a, s);
  }
  Field gp = grad(phi);
  Field V(fam.g, 2);
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) {
      Field s = fam.basis.e[i][a] * component(gp, c) - fam.basis.e[i][c] * component(gp, a);
      set_component(V, a * d + c, s);
    }
  fam.Phi[i] = std::move(phi);
  fam.W[i] = std::move(W);
  fam.V[i] = std::move(V);
}

}  // namespace

double mikado_phi(double r) {
  if (!(r > 0.5 && r < 1.0)) return 0.0;
  return std::exp(-1.0 / ((r - 0.5) * (1.0 - r)));
}

double mikado_psi(int d, double r) {
  if (!(r > 0.5 && r < 1.0)) return 0.0;
  const double q = (r - 0.5) * (1.0 - r), q1 = 1.5 - 2.0 * r, q2 = -2.0;
  const double f = std::exp(-1.0 / q);
  const double f1 = f * q1 / (q * q);
  const double f2 = f * (q1 * q1 / (q * q * q * q) + q2 / (q * q) - 2.0 * q1 * q1 / (q * q * q));
  return f2 + (d - 2) * f1 / r;
}

MikadoFamily build_mikado(const Basis& b, double mu, int N, const std::string& cache_dir) {
  if (mu < 4.0) throw std::invalid_argument("concentration must be at least 4");
  if (N < 8.0 * mu) throw std::invalid_argument("tube width must span at least 8 grid cells");
  MikadoFamily fam;
  fam.basis = b;
  fam.mu = mu;
  fam.g = Grid{b.d, N};
  const std::size_t n = b.size();
  fam.Phi.resize(n);
  fam.W.resize(n);
  fam.V.resize(n);
  fam.c_analytic.resize(n);
  fam.capture.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fam.c_analytic[i] = analytic_constant(b.d, mu, b.k[i]);
    Field phi;
    std::string file;
    if (!cache_dir.empty()) {
      std::filesystem::create_directories(cache_dir);
      file = cache_dir + "/" + cache_name(b, mu, N, i);
    }
    if (!file.empty() && std::filesystem::exists(file)) {
      phi = read_field(file);
    } else {
      phi = exact_potential(b, static_cast<int>(i), mu, fam.g);
      if (!file.empty()) write_field(file, phi, 0.0);
    }
    derive(fam, i, std::move(phi));
  }
  return fam;
}

MikadoFamily truncate_family(const MikadoFamily& fam, int B) {
  MikadoFamily out = fam;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    Field phi = truncate_box(fam.Phi[i], B);
    double keep = l2(lap(phi));
    if (keep == 0.0) throw std::invalid_argument("band limit removes every Mikado mode");
    derive(out, i, std::move(phi));
    out.capture[i] = fam.capture[i];
  }
  return out;
}

MikadoReport check_mikado(const MikadoFamily& fam) {
  MikadoReport r;
  const int d = fam.g.d;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const Field& W = fam.W[i];
    r.div_W = std::max(r.div_W, l2(div(W)) / l2(grad(W)));
    Field WW = outer(W, W);
    r.div_WW = std::max(r.div_WW, l2(div(WW)) / std::max(l2(grad(component(WW, 0))), l2(WW)));
    r.div_V_minus_W = std::max(r.div_V_minus_W, l2(div(fam.V[i]) - W) / l2(W));
    for (int a = 0; a < d; ++a) {
      for (int c = 0; c < d; ++c) {
        double g = inner(component(W, a), component(W, c));
        r.gram = std::max(r.gram, std::abs(g - fam.basis.e[i][a] * fam.basis.e[i][c]));
      }
      r.mean_W = std::max(r.mean_W, std::abs(mean(W, a)));
    }
    r.psi_norm = std::max(r.psi_norm, std::abs(l2(W) - 1.0));
    r.skew_V = std::max(r.skew_V, l2(fam.V[i] + transpose(fam.V[i])));
    r.resolution = std::max(r.resolution, std::abs(fam.capture[i] - 1.0));
  }
  return r;
}

}  // namespace rns
