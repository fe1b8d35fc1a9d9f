// One PASS/FAIL line per acceptance criterion. Arguments select a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "rns/antidiv.hpp"
#include "rns/convex.hpp"
#include "rns/geometry.hpp"
#include "rns/mikado.hpp"
#include "rns/noise.hpp"
#include "rns/profiles.hpp"
#include "rns/spectral.hpp"
#include "rns/uniqueness.hpp"
#include "support.hpp"

using namespace rns;
using rns::test::mean_free;
using rns::test::random_field;
using rns::test::sample;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]) / n, my += std::log(y[i]) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

std::vector<double> powers(const std::vector<double>& v, double m) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::pow(std::abs(v[i]), m);
  return out;
}

const char* kCache = "mikado_cache";

NoiseSpectrum toy_noise() {
  NoiseSpectrum s;
  s.d = 2;
  s.K = 4;
  s.beta = default_beta(2);
  s.amp = 0.02;
  return s;
}

StepParams toy_params() {
  StepParams p;
  p.mu = 16;
  p.sigma = 4;
  p.varsigma = 4;
  p.kappa = 64;
  p.ell = 1.0 / 64;
  p.full_schedule = false;
  return p;
}

struct Toy {
  Grid g;
  double dt;
  Path z;
  IterationState st;
};

Toy toy_state(int N, double dt, double T, std::uint64_t seed = 7) {
  Toy t{Grid{2, N}, dt, {}, {}};
  const int frames = static_cast<int>(std::lround(T / dt)) + 1;
  t.z = sample_z_path(Field(t.g, 1), toy_noise(), T, dt, seed, 1, 0);
  Path dw;
  Path w = default_w(t.g, dt, frames, 0.05, &dw);
  t.st = initial_state(w, t.z, 1.0, dw);
  return t;
}

StepGrid cached() {
  StepGrid g;
  g.cache_dir = kCache;
  return g;
}

// 1. Geometric lemma
void geometric(Verdict& v) {
  auto t0 = std::chrono::steady_clock::now();
  for (int d : {2, 3}) {
    Basis b = make_basis(d);
    const double err = decomposition_error(b, 10000, 11 + d);
    PositivityReport pos = certify_positivity(b, 10000, 11 + d);
    v.require(err <= 1e-10, "d=" + std::to_string(d) + " max reconstruction " + fmt(err) + " <= 1e-10");
    v.require(pos.ok && pos.sampled_min > 0.0, "d=" + std::to_string(d) + " min Gamma^2 " + fmt(pos.sampled_min) + " > 0");
  }
  const double sec = seconds_since(t0);
  v.require(sec < 5.0, "runtime " + fmt(sec) + " s < 5 s");
}

// 2. Mikado identities
void mikado_identities(Verdict& v) {
  auto t0 = std::chrono::steady_clock::now();
  MikadoReport r = check_mikado(build_mikado(make_basis(2), 16.0, 256));
  const double sec = seconds_since(t0);
  v.require(r.div_W <= 1e-8, "div W " + fmt(r.div_W));
  v.require(r.div_WW <= 1e-8, "div WW " + fmt(r.div_WW));
  v.require(r.div_V_minus_W <= 1e-8, "div V - W " + fmt(r.div_V_minus_W));
  v.require(r.psi_norm <= 1e-3, "| ||Psi||_2 - 1 | " + fmt(r.psi_norm));
  v.require(sec < 30.0, "runtime " + fmt(sec) + " s < 30 s");
}

// 3. Mikado scaling. Families on N = 32 mu keep the tube equally resolved at every mu.
void mikado_scaling(Verdict& v) {
  const std::vector<double> mus = {8, 16, 32, 64};
  const std::vector<double> alphas = {1.0, 2.0, kInf};
  Basis b = make_basis(2);
  const std::size_t K = b.size();
  // norms[k][alpha][kind]: kind 0 W, 1 grad W, 2 V
  std::vector<std::vector<std::array<std::vector<double>, 3>>> norms(K, std::vector<std::array<std::vector<double>, 3>>(3));
  std::vector<std::vector<std::vector<double>>> prod(K * K, std::vector<std::vector<double>>(3));
  for (double mu : mus) {
    MikadoFamily f = build_mikado(b, mu, static_cast<int>(32 * mu));
    for (std::size_t k = 0; k < K; ++k) {
      Field gw = grad(f.W[k]);
      for (std::size_t a = 0; a < 3; ++a) {
        norms[k][a][0].push_back(lq(f.W[k], alphas[a]));
        norms[k][a][1].push_back(lq(gw, alphas[a]));
        norms[k][a][2].push_back(lq(f.V[k], alphas[a]));
      }
      for (std::size_t j = k + 1; j < K; ++j) {
        Field ww = outer(f.W[k], f.W[j]);
        for (std::size_t a = 0; a < 3; ++a) prod[k * K + j][a].push_back(lq(ww, alphas[a]));
      }
    }
  }
  double wdev = 0.0, vdev = 0.0, pdev = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t a = 0; a < 3; ++a) {
      const double base = 0.5 - 1.0 / alphas[a];
      wdev = std::max(wdev, std::abs(slope(mus, norms[k][a][0]) - base));
      wdev = std::max(wdev, std::abs(slope(mus, norms[k][a][1]) - (1.0 + base)));
      vdev = std::max(vdev, std::abs(slope(mus, norms[k][a][2]) - (base - 1.0)));
      for (std::size_t j = k + 1; j < K; ++j)
        pdev = std::max(pdev, std::abs(slope(mus, prod[k * K + j][a]) - (1.0 - 2.0 / alphas[a])));
    }
  v.require(wdev <= 0.05, "W and grad W exponent deviation " + fmt(wdev) + " <= 0.05");
  v.require(vdev <= 0.05, "V exponent deviation " + fmt(vdev) + " <= 0.05");
  v.require(pdev <= 0.1, "k != k' product exponent deviation " + fmt(pdev) + " <= 0.1");
}

// 4. Anti-divergence
void antidivergence(Verdict& v) {
  double worst = 0.0;
  for (int N : {64, 128}) {
    Grid g{2, N};
    for (int i = 0; i < 100; ++i) {
      const unsigned seed = static_cast<unsigned>(1000 * N + 2 * i);
      Field f = random_field(g, 1, N / 4, seed);
      Field M = mean_free(trace_free(symmetrize(random_field(g, 2, N / 4, seed + 1))));
      AntiDivReport r = check_antidiv(f, M);
      worst = std::max({worst, r.div_R, r.div_B, r.R_lap, r.trace_R, r.sym_R});
    }
  }
  v.require(worst <= 1e-10, "worst identity residual over 200 cases " + fmt(worst) + " <= 1e-10");
  Grid g{2, 128};
  Field f = mean_free(random_field(g, 1, 3, 9));
  std::vector<double> sig, n1;
  for (int s : {2, 4, 8, 16}) {
    sig.push_back(s);
    n1.push_back(lq(apply_R(rescale(f, s, g.N, 3)), 1.0));
  }
  const double sl = slope(sig, n1);
  v.require(std::abs(sl + 1.0) <= 0.05, "||R f(sigma .)||_1 slope " + fmt(sl) + " = -1 +- 0.05");
}

// 5. Improved Holder
// The amplitude carries an algebraic tail to mode 200, so no sigma in the sweep decouples exactly.
void improved_holder(Verdict& v) {
  Grid g{2, 512};
  auto a = sample(g, 0, [](double x, double y, double) {
    double s = 1.0;
    for (int m = 1; m <= 200; ++m) s += 0.3 * std::cos(m * (x + y)) / (m * m);
    return std::vector<double>{s};
  });
  auto f = sample(g, 0, [](double x, double y, double) { return std::vector<double>{2.0 + std::cos(x + y)}; });
  for (double p : {1.0, 2.0}) {
    std::vector<double> sig, gap;
    for (int s : {4, 8, 16, 32}) {
      HolderGap h = improved_holder_gap(a, f, s, p);
      sig.push_back(s);
      gap.push_back(h.gap);
    }
    const double sl = slope(sig, gap);
    v.require(sl <= -1.0 / p + 0.1, "p=" + fmt(p) + " slope " + fmt(sl) + " <= " + fmt(-1.0 / p + 0.1));
  }
}

// 6. Temporal profiles
void profiles(Verdict& v) {
  std::vector<double> ks, l1, l4;
  double werr = 0.0, hmax = 0.0;
  for (double kappa : {16.0, 64.0, 256.0}) {
    const double dt = 1.0 / (32.0 * kappa);
    SampledProfile s = build_g(kappa, 1, dt, 3.0);
    for (double w = 0.0; w <= 2.0; w += 0.125) werr = std::max(werr, std::abs(window_norm(powers(s.g, 2), dt, w, 1.0) - 1.0));
    for (double h : s.h) hmax = std::max(hmax, std::abs(h));
    ks.push_back(kappa);
    l1.push_back(window_norm(s.g, dt, 0.0, 1.0));
    l4.push_back(std::pow(window_norm(powers(s.g, 4), dt, 0.0, 1.0), 0.25));
  }
  SampledProfile osc = build_g(16.0, 4, 1.0 / 8192, 3.0);
  for (double w = 0.0; w <= 2.0; w += 0.125) werr = std::max(werr, std::abs(window_norm(powers(osc.g, 2), osc.dt, w, 1.0) - 1.0));
  for (double h : osc.h) hmax = std::max(hmax, std::abs(h));
  v.require(werr <= 1e-6, "window L2 deviation " + fmt(werr) + " <= 1e-6");
  v.require(hmax <= 1.0, "sup |h| " + fmt(hmax) + " <= 1");
  const double s1 = slope(ks, l1), s4 = slope(ks, l4);
  v.require(std::abs(s1 + 0.5) <= 0.05, "L1 exponent " + fmt(s1) + " = -1/2 +- 0.05");
  v.require(std::abs(s4 - 0.25) <= 0.05, "L4 exponent " + fmt(s4) + " = 1/4 +- 0.05");
}

// 7. Noise
void noise(Verdict& v) {
  auto t0 = std::chrono::steady_clock::now();
  NoiseModes m;
  m.d = 2;
  m.k = {{1, 0, 0}};
  m.pol = {{0.0, 1.0, 0.0}};
  m.k2 = {1.0};
  m.g = {0.8};
  const double dt = 1.0 / 32;
  const int samples = 10000;
  double worst = 0.0;
  for (int steps : {8, 32, 256}) {
    const double t = steps * dt, lam = 2.0;
    const double exact = 0.64 * -std::expm1(-2.0 * lam * t) / (2.0 * lam);
    double s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double x = sample_modal_path(m, 1, dt, steps, 99, i)[steps][0];
      s2 += x * x;
      s4 += x * x * x * x;
    }
    s2 /= samples;
    s4 /= samples;
    worst = std::max(worst, std::abs(s2 - exact) / std::sqrt((s4 - s2 * s2) / samples));
  }
  v.require(worst <= 3.0, "OU variance deviation " + fmt(worst) + " stderr <= 3");
  NoiseSpectrum s{2, 8, default_beta(2), 1.0};
  MomentTable t = estimate_convolution_moments(s, 0.25, 2.0, 4, 1000, 1.0 / 64, 5);
  v.require(t.flatness <= 1.5, "Holder moment flatness over s = 0..4 " + fmt(t.flatness) + " <= 1.5");
  const double sec = seconds_since(t0);
  v.require(sec < 120.0, "runtime " + fmt(sec) + " s < 120 s");
}

// 8. Residual certificates at the toy configuration and one halving of (dt, 1/N)
double corrupted(const Path& v, Path R, const Path& z) {
  std::size_t worst = 1;
  for (std::size_t n = 1; n + 1 < R.size(); ++n)
    if (l2(R.f[n]) > l2(R.f[worst])) worst = n;
  R.f[worst] *= 1.01;
  return residual_certificate(v, R, z, 1.0).relative;
}

void certificates(Verdict& v) {
  const double T = 9.0 / 32;
  double fine_abs = 0.0;
  {
    Toy f = toy_state(256, 1.0 / 1024, T);
    StepResult r = step(f.st, toy_params(), f.z, cached());
    fine_abs = r.diag.certificate.max_abs;
  }
  Toy c = toy_state(128, 1.0 / 512, T);
  ResidualReport init = residual_certificate(c.st.v, c.st.R, c.z, 1.0);
  v.require(init.relative <= 1e-5, "initial state relative " + fmt(init.relative) + " <= 1e-5");
  StepResult r = step(c.st, toy_params(), c.z, cached());
  const ResidualReport& cert = r.diag.certificate;
  v.require(cert.relative <= 1e-5, "step relative " + fmt(cert.relative) + " <= 1e-5");
  v.require(r.diag.l1l1[kFar] > 0.0, "perturbation active (far L1L1 " + fmt(r.diag.l1l1[kFar]) + ")");
  const double ratio = cert.max_abs / fine_abs;
  v.require(ratio >= 3.5, "halving to N=256, dt=1/1024 shrinks the residual " + fmt(cert.max_abs) + " -> " +
                              fmt(fine_abs) + " (x" + fmt(ratio) + ") >= 3.5");
  const double bad_init = corrupted(c.st.v, c.st.R, c.z), bad_step = corrupted(r.next.v, r.next.R, c.z);
  v.require(bad_init > 1e-5 && bad_step > 1e-5,
            "1% stress corruption fails the certificate (" + fmt(bad_init) + ", " + fmt(bad_step) + " > 1e-5)");
}

// 9. Causality
void causality(Verdict& v) {
  Toy s = toy_state(64, 1.0 / 512, 9.0 / 32);
  const long cut = 96;
  // noise: a longer horizon keeps the prefix
  Path zl = sample_z_path(Field(s.g, 1), toy_noise(), 0.5, s.dt, 7, 1, 0);
  bool same = true;
  for (long n = 0; n < static_cast<long>(s.z.size()); ++n) same = same && zl.f[n].c == s.z.f[n].c;
  v.require(same, "noise path prefix independent of the horizon");
  // input frames after cut
  StepResult a = step(s.st, toy_params(), s.z, cached());
  Path z2 = s.z;
  IterationState st2 = s.st;
  for (long n = cut + 1; n < static_cast<long>(z2.size()); ++n) {
    z2.f[n] = leray(z2.f[n] + random_field(s.g, 1, 3, static_cast<unsigned>(n)));
    st2.v.f[n] *= 1.5;
    st2.R.f[n] *= 0.5;
  }
  StepResult b = step(st2, toy_params(), z2, cached());
  bool prefix = true;
  for (long n = 0; n <= cut; ++n) prefix = prefix && a.next.v.f[n].c == b.next.v.f[n].c && a.next.R.f[n].c == b.next.R.f[n].c;
  v.require(prefix, "step output frames t <= t* bit-identical");
  v.require(a.next.v.f[cut + 2].c != b.next.v.f[cut + 2].c, "later frames do respond");
  // uniqueness lab solutions
  Grid g = s.g;
  GalerkinRun r1 = galerkin_solve(taylor_green(g, 0.5), toy_noise(), 1.0 / 512, 0.25, 3);
  GalerkinRun r2 = galerkin_solve(taylor_green(g, 0.5), toy_noise(), 1.0 / 512, 0.125, 3);
  bool gal = true;
  for (long n = 0; n < static_cast<long>(r2.u.size()); ++n) gal = gal && r1.u.f[n].c == r2.u.f[n].c;
  v.require(gal, "Galerkin solution prefix independent of the horizon");
}

// 10. Component scaling. Each sweep varies one parameter from a common state. The far
// term needs the tube crossings resolved: families on 32 mu and B_W about 12 mu on the
// step grid. The window holds one profile bump inside the cutoff ramp.
double component_norm(int N, double dt, double T, const StepParams& p, StepGrid grid, int c) {
  Toy s = toy_state(N, dt, T);
  StepResult r = step(s.st, p, s.z, grid);
  if (!r.diag.certificate.pass(1e-5)) throw std::runtime_error("step certificate failed in the scaling sweep");
  return r.diag.l1l1[c];
}

void component_scaling(Verdict& v) {
  const double dt = 1.0 / 512, T_short = 26.0 / 512;
  StepParams p = toy_params();
  p.varsigma = 24;
  p.kappa = 8;
  p.ell = 1.0 / 256;
  std::vector<double> mus = {4, 8, 12}, far;
  for (double mu : mus) {
    StepParams q = p;
    q.mu = mu;
    q.sigma = 1;
    StepGrid g = cached();
    g.B_W = 143;
    g.family_N = static_cast<int>(32 * mu);
    far.push_back(component_norm(576, dt, T_short, q, g, kFar));
  }
  std::vector<double> sigmas = {2, 4, 8}, oscx;
  for (double sg : sigmas) {
    StepParams q = p;
    q.mu = 4;
    q.sigma = sg;
    StepGrid g = cached();
    g.B_W = 7;
    g.family_N = 128;
    oscx.push_back(component_norm(256, dt, T_short, q, g, kOscX));
  }
  std::vector<double> vss = {8, 16, 32}, osct;
  for (double vs : vss) {
    StepParams q = toy_params();
    q.mu = 8;
    q.sigma = 2;
    q.varsigma = vs;
    q.kappa = 4;
    osct.push_back(component_norm(64, dt, 0.5, q, cached(), kOscT));
  }
  const double sf = slope(mus, far), sx = slope(sigmas, oscx), st = slope(vss, osct);
  v.require(std::abs(sf + 1.0) <= 0.2, "far slope in mu " + fmt(sf) + " = -1 +- 0.2");
  v.require(std::abs(sx + 1.0) <= 0.3, "osc_x slope in sigma " + fmt(sx) + " = -1 +- 0.3");
  v.require(std::abs(st + 1.0) <= 0.2, "osc_t slope in varsigma " + fmt(st) + " = -1 +- 0.2");
}

// 11. Mollification convergence
void mollification(Verdict& v) {
  NoiseSpectrum s{2, 8, default_beta(2), 1.0};
  auto rows = mollification_error(s, {0.25, 0.125, 0.0625, 0.03125, 0.015625}, 0.0, 200, 1.0 / 256, 13);
  bool dec = true;
  std::string seq;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    seq += fmt(rows[i].estimate) + (i + 1 < rows.size() ? " > " : "");
    if (i > 0) dec = dec && rows[i].estimate < rows[i - 1].estimate;
  }
  v.require(dec, "error over ell = 2^-2..2^-6: " + seq);
}

// 12. Uniqueness lab
void uniqueness_lab(Verdict& v) {
  auto t0 = std::chrono::steady_clock::now();
  Grid g{2, 128};
  NoiseSpectrum s{2, 4, default_beta(2), 0.5};
  const double dt = 1e-3, T = 0.25;
  Field u0 = taylor_green(g, 1.0);
  EnergyLedger en = energy_check(galerkin_ensemble(u0, s, dt, T, 21, 200, 1.0, 1, false));
  v.require(en.ok, "energy inequality at every frame, worst margin " + fmt(en.worst_margin) + " of 3 stderr + dt allowance");

  GalerkinRun fine = galerkin_solve(u0, s, dt, T, 21, 0, 1.0, 2);
  double c1 = 0.0, c2 = 0.0;
  Path chi1 = linearized_solve(fine, u0, 1), chi2 = linearized_solve(fine, u0, 2);
  for (std::size_t n = 1; n < fine.u.size(); ++n) {
    const double un = l2(fine.u.f[n]);
    c1 = std::max(c1, l2(chi1.f[n] - fine.u.f[n]) / un);
    c2 = std::max(c2, l2(chi2.f[n] - fine.u.f[n]) / un);
  }
  v.require(c2 <= 1e-3, "linearized coincidence with common noise, interpolated coefficient " + fmt(c2) + " <= 1e-3");
  v.require(c1 <= 1e-3, "frozen coefficient " + fmt(c1) + " <= 1e-3");

  Field du = leray(random_field(g, 1, 4, 5));
  du *= 1e-6 / l2(du);
  GalerkinRun pert = galerkin_solve(u0 + du, s, dt, T, 21, 0);
  GapLedger gap = pathwise_gap(galerkin_solve(u0, s, dt, T, 21, 0), pert);
  double worst = 0.0;
  for (std::size_t n = 1; n < gap.t.size(); ++n) worst = std::max(worst, gap.gap2[n] / gap.majorant[n]);
  v.require(gap.ok, "Gronwall ledger respected, max gap^2 / majorant after t = 0 " + fmt(worst) + ", identity defect " +
                        fmt(gap.identity));
  const double sec = seconds_since(t0);
  v.require(sec < 600.0, "runtime " + fmt(sec) + " s < 600 s");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"geometric lemma", geometric},
      {"Mikado identities", mikado_identities},
      {"Mikado scaling", mikado_scaling},
      {"anti-divergence", antidivergence},
      {"improved Holder", improved_holder},
      {"temporal profiles", profiles},
      {"noise", noise},
      {"residual certificates", certificates},
      {"causality", causality},
      {"component scaling", component_scaling},
      {"mollification convergence", mollification},
      {"uniqueness lab", uniqueness_lab},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "error: " << e.what();
    }
    std::printf("%s %2d %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), seconds_since(t0),
                v.detail.str().c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
