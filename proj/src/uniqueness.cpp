#include "rns/uniqueness.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace rns {

namespace {

// Per-mode factors of the exponential Euler step.
struct Propagator {
  std::vector<double> E, Phi;
  Propagator(const Grid& g, double nu, double h) {
    const auto& mt = modes(g);
    E.resize(g.nspec());
    Phi.resize(g.nspec());
    for (std::size_t i = 0; i < g.nspec(); ++i) {
      const double lam = nu * mt.k2[i];
      E[i] = std::exp(-lam * h);
      Phi[i] = lam * h < 1e-12 ? h : -std::expm1(-lam * h) / lam;
    }
  }
  // u <- E u + Phi n
  void apply(Field& u, const Field& n) const {
    const std::size_t ns = u.g.nspec();
    for (int c = 0; c < u.ncomp(); ++c) {
      cplx* x = u.comp(c);
      const cplx* y = n.comp(c);
      for (std::size_t i = 0; i < ns; ++i) x[i] = E[i] * x[i] + Phi[i] * y[i];
    }
  }
};

// Exact stochastic convolution over one coarse step built from fine increments.
class NoiseStream {
 public:
  NoiseStream(const NoiseSpectrum& s, double nu, double fine_dt, std::uint64_t seed, std::uint64_t sample)
      : m_(noise_modes(s)), seed_(seed), sample_(sample) {
    st_.resize(m_.size());
    for (std::size_t j = 0; j < m_.size(); ++j) st_[j] = ou_step(nu * m_.k2[j], fine_dt);
  }
  // Aggregates fine steps [first, first + count) into one increment field.
  Field increment(std::uint64_t first, int count, const Grid& g) const {
    std::vector<double> x(2 * m_.size(), 0.0);
    std::normal_distribution<double> n01;
    for (int r = 0; r < count; ++r) {
      auto rng = frame_rng(seed_, sample_, first + r);
      for (std::size_t j = 0; j < m_.size(); ++j)
        for (int c = 0; c < 2; ++c) {
          double& v = x[2 * j + c];
          v = st_[j].a * v + st_[j].b * m_.g[j] * n01(rng);
        }
    }
    return modal_field(m_, x, g);
  }
  bool silent() const {
    for (double g : m_.g)
      if (g != 0.0) return false;
    return true;
  }

 private:
  NoiseModes m_;
  std::vector<OUStep> st_;
  std::uint64_t seed_, sample_;
};

Field advection(const Field& a, const Field& b) { return (-1.0) * leray(div(outer(a, b))); }

double sq(double x) { return x * x; }

template <class F>
void strided(int n, int workers, F&& f) {
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

constexpr std::uint64_t kIndependent = 0x8000000000000000ULL;

}  // namespace

GalerkinRun galerkin_solve(const Field& u0, const NoiseSpectrum& s, double dt, double T, std::uint64_t seed,
                           std::uint64_t sample, double nu, int noise_refine, bool keep_path) {
  if (u0.rank != 1 || u0.g.d != s.d) throw std::invalid_argument("initial datum must be a vector field of matching dimension");
  if (l2(div(u0)) > 1e-10 * (1.0 + l2(u0))) throw std::invalid_argument("initial datum must be divergence-free");
  if (noise_refine < 1) throw std::invalid_argument("noise_refine must be positive");
  GalerkinRun run;
  run.spec = s;
  run.nu = nu;
  run.dt = dt;
  run.seed = seed;
  run.sample = sample;
  run.noise_refine = noise_refine;
  run.u.dt = dt;
  const Grid g = u0.g;
  const int steps = static_cast<int>(std::lround(T / dt));
  Propagator prop(g, nu, dt);
  NoiseStream noise(s, nu, dt / noise_refine, seed, sample);
  const bool silent = noise.silent();
  Field u = u0;
  double diss = 0.0, prev_grad = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double gu = nu * sq(l2(grad(u)));
    if (n > 0) diss += 0.5 * dt * (gu + prev_grad);
    prev_grad = gu;
    const double sup = lq(u, kInf, 1);
    if (dt * sup * g.N > 0.5)
      throw std::runtime_error("CFL guard: dt ||u||_inf N = " + std::to_string(dt * sup * g.N) +
                               " exceeds 0.5, reduce dt");
    run.energy.push_back(0.5 * sq(l2(u)));
    run.dissipation.push_back(diss);
    run.linf.push_back(sup);
    if (keep_path || n == steps) run.u.f.push_back(u);
    if (n == steps) break;
    Field nl = advection(u, u);
    prop.apply(u, nl);
    if (!silent) u += noise.increment(static_cast<std::uint64_t>(n) * noise_refine, noise_refine, g);
  }
  return run;
}

Path linearized_solve(const GalerkinRun& run, const Field& chi0, int substeps, bool common_noise) {
  if (substeps < 1 || run.noise_refine % substeps != 0)
    throw std::invalid_argument("substeps must divide the noise refinement of the run");
  const Grid g = chi0.g;
  const double h = run.dt / substeps;
  const int per = run.noise_refine / substeps;
  Propagator prop(g, run.nu, h);
  NoiseStream noise(run.spec, run.nu, run.dt / run.noise_refine, run.seed,
                    common_noise ? run.sample : run.sample ^ kIndependent);
  const bool silent = noise.silent();
  Path chi;
  chi.dt = run.dt;
  Field x = chi0;
  chi.f.push_back(x);
  const long F = static_cast<long>(run.u.size());
  for (long n = 0; n + 1 < F; ++n) {
    for (int s = 0; s < substeps; ++s) {
      const double w = static_cast<double>(s) / substeps;
      Field u = w == 0.0 ? run.u.f[n] : (1.0 - w) * run.u.f[n] + w * run.u.f[n + 1];
      if (h * lq(u, kInf, 1) * g.N > 0.5) throw std::runtime_error("CFL guard violated in the linear solve");
      Field nl = advection(u, x);
      prop.apply(x, nl);
      if (!silent) {
        const std::uint64_t first = static_cast<std::uint64_t>(n) * run.noise_refine + static_cast<std::uint64_t>(s) * per;
        x += noise.increment(first, per, g);
      }
    }
    chi.f.push_back(x);
  }
  return chi;
}

LpsReport lps_classify(int d, double p, double q) {
  LpsReport r;
  r.p = p;
  r.q = q;
  r.scale = (std::isinf(p) ? 0.0 : 2.0 / p) + (std::isinf(q) ? 0.0 : d / q);
  const double tol = 1e-12;
  r.regime = r.scale < 1.0 - tol ? "subcritical" : (r.scale <= 1.0 + tol ? "critical" : "supercritical");
  r.admissible = r.scale <= 1.0 + tol;
  return r;
}

LpsReport lps_monitor(const GalerkinRun& run, double p, double q) {
  if (!(p >= 2.0) || !(q > 2.0)) throw std::invalid_argument("need p in [2, inf] and q in (2, inf]");
  LpsReport r = lps_classify(run.spec.d, p, q);
  const std::size_t F = run.u.size();
  std::vector<double> nq(F);
  for (std::size_t n = 0; n < F; ++n) nq[n] = lq(run.u.f[n], q, 1);
  if (std::isinf(p)) {
    for (double v : nq) r.norm = std::max(r.norm, v);
  } else {
    double acc = 0.0;
    for (std::size_t n = 0; n < F; ++n) acc += (n == 0 || n + 1 == F ? 0.5 : 1.0) * run.dt * std::pow(nq[n], p);
    r.norm = std::pow(acc, 1.0 / p);
  }
  for (std::size_t n = 0; n + 1 < F; ++n) r.modulus = std::max(r.modulus, lq(run.u.f[n + 1] - run.u.f[n], q, 1));
  return r;
}

EnergyLedger energy_check(const std::vector<GalerkinRun>& runs, double allowance) {
  EnergyLedger led;
  if (runs.empty()) return led;
  led.trace = runs[0].spec.trace();
  const double dt = runs[0].dt;
  std::size_t F = runs[0].energy.size();
  for (const auto& r : runs) F = std::min(F, r.energy.size());
  const double S = static_cast<double>(runs.size());
  double e0 = 0.0;
  for (const auto& r : runs) e0 += r.energy[0];
  e0 /= S;
  for (std::size_t n = 0; n < F; ++n) {
    double m = 0.0, m2 = 0.0;
    for (const auto& r : runs) {
      const double v = r.energy[n] + r.dissipation[n];
      m += v;
      m2 += v * v;
    }
    m /= S;
    const double var = S > 1 ? std::max(m2 / S - m * m, 0.0) * S / (S - 1) : 0.0;
    LedgerRow row;
    row.t = n * dt;
    row.quantity = "energy";
    row.value = m;
    row.stderr_ = std::sqrt(var / S);
    row.bound = e0 + 0.5 * row.t * led.trace;
    const double slack = 3.0 * row.stderr_ + allowance * dt * row.bound;
    row.flag = m - row.bound > slack;
    if (slack > 0.0) led.worst_margin = std::max(led.worst_margin, (m - row.bound) / slack);
    led.ok = led.ok && !row.flag;
    led.rows.push_back(row);
  }
  return led;
}

GapLedger pathwise_gap(const GalerkinRun& a, const GalerkinRun& b, double allowance) {
  const bool noisy = a.spec.amp != 0.0 || b.spec.amp != 0.0;
  if (noisy) {
    const bool same = a.seed == b.seed && a.sample == b.sample && a.spec.d == b.spec.d && a.spec.K == b.spec.K &&
                      a.spec.beta == b.spec.beta && a.spec.amp == b.spec.amp &&
                      std::abs(a.dt / a.noise_refine - b.dt / b.noise_refine) <= 1e-12 * a.dt;
    if (!same) throw std::invalid_argument("runs must share the noise increments");
  }
  if (a.nu != b.nu) throw std::invalid_argument("runs must share the viscosity");
  const double dt = std::max(a.dt, b.dt);
  const long ra = std::lround(dt / a.dt), rb = std::lround(dt / b.dt);
  if (std::abs(ra * a.dt - dt) > 1e-12 * dt || std::abs(rb * b.dt - dt) > 1e-12 * dt)
    throw std::invalid_argument("time steps must be commensurate");
  const long F = std::min((static_cast<long>(a.u.size()) - 1) / ra, (static_cast<long>(b.u.size()) - 1) / rb) + 1;
  GapLedger led;
  const double nu = a.nu;
  for (long n = 0; n < F; ++n) {
    const Field& u1 = a.u.f[n * ra];
    Field Y = u1 - b.u.f[n * rb];
    Field gY = grad(Y);
    const int M = 2 * Y.g.N, d = Y.g.d;
    Phys pu = to_phys(u1, M), pY = to_phys(Y, M), pg = to_phys(gY, M);
    double cross = 0.0;
    for (std::size_t x = 0; x < pu.size(); ++x)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) cross += pu.v[i][x] * pY.v[j][x] * pg.v[i * d + j][x];
    cross *= std::pow(2.0 * kPi / M, d);
    led.t.push_back(n * dt);
    led.gap2.push_back(sq(l2(Y)));
    led.grad2.push_back(sq(l2(gY)));
    led.cross.push_back(cross);
    led.rate_bound.push_back(sq(lq(u1, kInf, 2)) / (2.0 * nu));
  }
  double expo = 0.0;
  for (long n = 0; n < F; ++n) {
    if (n > 0) expo += 0.5 * dt * (led.rate_bound[n] + led.rate_bound[n - 1]);
    led.majorant.push_back(led.gap2[0] * std::exp(expo) + allowance);
    const long lo = std::max(n - 1, 0L), hi = std::min(n + 1, F - 1);
    double dg = hi > lo ? (led.gap2[hi] - led.gap2[lo]) / ((hi - lo) * dt) : 0.0;
    led.rate.push_back(led.gap2[n] > 0.0 ? dg / led.gap2[n] : 0.0);
    if (n > 0 && n + 1 < F) {
      const double lhs = 0.5 * dg + nu * led.grad2[n];
      const double res = std::abs(lhs - led.cross[n]);
      const double scale = std::abs(0.5 * dg) + nu * led.grad2[n] + std::abs(led.cross[n]);
      if (scale > 0.0) led.identity = std::max(led.identity, res / scale);
    }
    const bool fast = led.gap2[0] > 0.0 && led.gap2[n] > 0.0 && led.rate[n] > led.rate_bound[n] * (1.0 + 1e-9);
    if (led.gap2[n] > led.majorant[n] * (1.0 + 1e-9) || fast) {
      led.ok = false;
      led.flagged.push_back(static_cast<int>(n));
    }
  }
  return led;
}

std::vector<GalerkinRun> galerkin_ensemble(const Field& u0, const NoiseSpectrum& s, double dt, double T,
                                           std::uint64_t seed, int samples, double nu, int workers, bool keep_paths) {
  std::vector<GalerkinRun> runs(samples);
  strided(samples, workers, [&](int i) { runs[i] = galerkin_solve(u0, s, dt, T, seed, i, nu, 1, keep_paths); });
  return runs;
}

Field taylor_green(const Grid& g, double amp) {
  // (sin x cos y, -cos x sin y), times cos z in 3D
  Phys p(g.d, g.N, 1);
  const double h = 2.0 * kPi / g.N;
  const std::size_t N = g.N;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t r = g.d == 2 ? i : i / N;
    const double x = h * static_cast<double>(r / N), y = h * static_cast<double>(r % N);
    const double z = g.d == 2 ? 0.0 : h * static_cast<double>(i % N);
    p.v[0][i] = amp * std::sin(x) * std::cos(y) * std::cos(z);
    p.v[1][i] = -amp * std::cos(x) * std::sin(y) * std::cos(z);
  }
  return from_phys(p, g.N);
}

std::vector<LedgerRow> gap_rows(const GapLedger& g) {
  std::vector<LedgerRow> rows;
  for (std::size_t n = 0; n < g.t.size(); ++n) {
    rows.push_back({g.t[n], "gap2", g.gap2[n], 0.0, g.majorant[n], g.gap2[n] > g.majorant[n] * (1.0 + 1e-9)});
    rows.push_back({g.t[n], "grad2", g.grad2[n], 0.0, 0.0, false});
    rows.push_back({g.t[n], "cross", g.cross[n], 0.0, 0.0, false});
    rows.push_back({g.t[n], "rate", g.rate[n], 0.0, g.rate_bound[n], g.gap2[0] > 0.0 && g.gap2[n] > 0.0 && g.rate[n] > g.rate_bound[n] * (1.0 + 1e-9)});
  }
  return rows;
}

void write_ledger_csv(const std::string& file, const std::vector<LedgerRow>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  out << "t,quantity,value,stderr,bound,flag\n";
  for (const auto& r : rows)
    out << r.t << "," << r.quantity << "," << r.value << "," << r.stderr_ << "," << r.bound << "," << (r.flag ? 1 : 0)
        << "\n";
}

}  // namespace rns
