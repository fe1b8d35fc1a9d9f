#include "rns/spectral.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>

namespace rns {

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

struct Plan {
  fftw_plan plan = nullptr;
  double* r = nullptr;
  fftw_complex* c = nullptr;
  std::size_t nr = 0, nc = 0;
  ~Plan() {
    if (plan) fftw_destroy_plan(plan);
    if (r) fftw_free(r);
    if (c) fftw_free(c);
  }
};

Plan& get_plan(int d, int M, bool forward) {
  static std::map<std::tuple<int, int, bool>, std::unique_ptr<Plan>> cache;
  auto key = std::make_tuple(d, M, forward);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto p = std::make_unique<Plan>();
  p->nr = ipow(M, d);
  p->nc = ipow(M, d - 1) * (M / 2 + 1);
  p->r = fftw_alloc_real(p->nr);
  p->c = fftw_alloc_complex(p->nc);
  int dims[3] = {M, M, M};
  if (forward)
    p->plan = fftw_plan_dft_r2c(d, dims, p->r, p->c, FFTW_ESTIMATE);
  else
    p->plan = fftw_plan_dft_c2r(d, dims, p->c, p->r, FFTW_ESTIMATE);
  auto& ref = *p;
  cache.emplace(key, std::move(p));
  return ref;
}

// Map from active N-grid coefficients to the M-grid layout.
const std::vector<std::size_t>& pad_map(const Grid& g, int M) {
  static std::map<std::tuple<int, int, int>, std::vector<std::size_t>> cache;
  auto key = std::make_tuple(g.d, g.N, M);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const auto& mt = modes(g);
  Grid G{g.d, M};
  std::vector<std::size_t> map(g.nspec(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < g.nspec(); ++i)
    if (mt.active[i]) map[i] = spec_index(G, mt.k[i]);
  return cache.emplace(key, std::move(map)).first->second;
}

double bump(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

double bump_hat_raw(int d, double xi) {
  using boost::math::quadrature::gauss;
  const int panels = 16 + static_cast<int>(xi);
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = static_cast<double>(p) / panels, b = static_cast<double>(p + 1) / panels;
    auto f = [&](double r) {
      if (d == 2) return 2.0 * kPi * bump(r) * std::cyl_bessel_j(0.0, xi * r) * r;
      double s = xi * r < 1e-8 ? 1.0 : std::sin(xi * r) / (xi * r);
      return 4.0 * kPi * bump(r) * s * r * r;
    };
    sum += gauss<double, 20>::integrate(f, a, b);
  }
  return sum;
}

}  // namespace

std::size_t Grid::nspec() const { return ipow(N, d - 1) * (N / 2 + 1); }
std::size_t Grid::nphys() const { return ipow(N, d); }
double Grid::volume() const { return std::pow(2.0 * kPi, d); }

int ncomp(int d, int rank) { return rank == 0 ? 1 : rank == 1 ? d : d * d; }

std::size_t spec_index(const Grid& g, const Wave& k) {
  const int N = g.N, Nh = N / 2 + 1;
  auto wrap = [N](int q) { return static_cast<std::size_t>((q % N + N) % N); };
  if (g.d == 2) return wrap(k[0]) * Nh + static_cast<std::size_t>(k[1]);
  return (wrap(k[0]) * N + wrap(k[1])) * Nh + static_cast<std::size_t>(k[2]);
}

const ModeTable& modes(const Grid& g) {
  static std::map<std::pair<int, int>, std::unique_ptr<ModeTable>> cache;
  auto key = std::make_pair(g.d, g.N);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  if (g.d != 2 && g.d != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (g.N < 4 || g.N % 2) throw std::invalid_argument("N must be even and >= 4");
  auto t = std::make_unique<ModeTable>();
  const int N = g.N, Nh = N / 2 + 1;
  const std::size_t n = g.nspec();
  t->k.resize(n);
  t->k2.resize(n);
  t->weight.resize(n);
  t->active.resize(n);
  auto sgn = [N](int i) { return i < N / 2 ? i : i - N; };
  for (std::size_t idx = 0; idx < n; ++idx) {
    Wave k{0, 0, 0};
    int last = static_cast<int>(idx % Nh);
    std::size_t rest = idx / Nh;
    if (g.d == 2) {
      k = {sgn(static_cast<int>(rest)), last, 0};
    } else {
      k = {sgn(static_cast<int>(rest / N)), sgn(static_cast<int>(rest % N)), last};
    }
    t->k[idx] = k;
    double s = 0.0;
    bool act = true;
    for (int a = 0; a < g.d; ++a) {
      s += static_cast<double>(k[a]) * k[a];
      if (std::abs(k[a]) == N / 2) act = false;
    }
    t->k2[idx] = s;
    t->active[idx] = act;
    t->weight[idx] = (last == 0 || last == N / 2) ? 1.0 : 2.0;
  }
  auto& ref = *t;
  cache.emplace(key, std::move(t));
  return ref;
}

Field::Field(Grid grid, int r) : g(grid), rank(r), c(static_cast<std::size_t>(rns::ncomp(grid.d, r)) * grid.nspec()) {}

cplx Field::coeff(const Wave& k, int comp_i) const {
  const int last = g.d - 1;
  for (int a = 0; a < g.d; ++a)
    if (k[a] < -g.N / 2 || k[a] >= g.N / 2) return 0.0;
  if (k[last] < 0) {
    Wave m{-k[0], -k[1], -k[2]};
    for (int a = 0; a < g.d; ++a)
      if (m[a] == g.N / 2) return 0.0;
    return std::conj(comp(comp_i)[spec_index(g, m)]);
  }
  return comp(comp_i)[spec_index(g, k)];
}

void Field::set_coeff(const Wave& k, int comp_i, cplx v) {
  const int last = g.d - 1;
  Wave kk = k;
  if (kk[last] < 0) {
    kk = {-k[0], -k[1], -k[2]};
    v = std::conj(v);
  }
  comp(comp_i)[spec_index(g, kk)] = v;
  if (kk[last] == 0) {
    Wave m{-kk[0], -kk[1], -kk[2]};
    m[last] = 0;
    comp(comp_i)[spec_index(g, m)] = std::conj(v);
  }
}

Field& Field::operator+=(const Field& o) {
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  return *this;
}
Field& Field::operator-=(const Field& o) {
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  return *this;
}
Field& Field::operator*=(double a) {
  for (auto& x : c) x *= a;
  return *this;
}
void Field::axpy(double a, const Field& o) {
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += a * o.c[i];
}
void Field::zero() { std::fill(c.begin(), c.end(), cplx(0.0)); }

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field b) { return b *= a; }

Phys::Phys(int dim, int m, int r) : d(dim), M(m), rank(r) {
  v.assign(ncomp(), std::vector<double>(ipow(m, dim), 0.0));
}
std::size_t Phys::size() const { return ipow(M, d); }

void fft_forward(int d, int M, const double* in, cplx* out) {
  Plan& p = get_plan(d, M, true);
  std::memcpy(p.r, in, p.nr * sizeof(double));
  fftw_execute(p.plan);
  const double s = 1.0 / static_cast<double>(p.nr);
  for (std::size_t i = 0; i < p.nc; ++i) out[i] = cplx(p.c[i][0] * s, p.c[i][1] * s);
}

void fft_backward(int d, int M, const cplx* in, double* out) {
  Plan& p = get_plan(d, M, false);
  std::memcpy(p.c, in, p.nc * sizeof(fftw_complex));
  fftw_execute(p.plan);
  std::memcpy(out, p.r, p.nr * sizeof(double));
}

int padded_size(int N) {
  int M = (3 * N + 1) / 2;
  return M + (M % 2);
}

Phys to_phys(const Field& f, int M) {
  if (M == 0) M = f.g.N;
  Phys p(f.g.d, M, f.rank);
  Grid G{f.g.d, M};
  std::vector<cplx> buf(G.nspec());
  const auto& map = pad_map(f.g, M);
  for (int c = 0; c < f.ncomp(); ++c) {
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    const cplx* src = f.comp(c);
    for (std::size_t i = 0; i < map.size(); ++i)
      if (map[i] != static_cast<std::size_t>(-1)) buf[map[i]] = src[i];
    fft_backward(f.g.d, M, buf.data(), p.v[c].data());
  }
  return p;
}

Field from_phys(const Phys& p, int N) {
  Grid g{p.d, N};
  Field f(g, p.rank);
  Grid G{p.d, p.M};
  std::vector<cplx> buf(G.nspec());
  const auto& map = pad_map(g, p.M);
  for (int c = 0; c < p.ncomp(); ++c) {
    fft_forward(p.d, p.M, p.v[c].data(), buf.data());
    cplx* dst = f.comp(c);
    for (std::size_t i = 0; i < map.size(); ++i)
      dst[i] = map[i] != static_cast<std::size_t>(-1) ? buf[map[i]] : cplx(0.0);
  }
  return f;
}

Field apply_multiplier(const Field& f, const std::function<double(const Wave&, double)>& m) {
  Field out(f.g, f.rank);
  const auto& mt = modes(f.g);
  const std::size_t n = f.g.nspec();
  for (std::size_t i = 0; i < n; ++i) {
    double w = mt.active[i] ? m(mt.k[i], mt.k2[i]) : 0.0;
    for (int c = 0; c < f.ncomp(); ++c) out.comp(c)[i] = w * f.comp(c)[i];
  }
  return out;
}

void zero_nyquist(Field& f) {
  const auto& mt = modes(f.g);
  for (std::size_t i = 0; i < f.g.nspec(); ++i)
    if (!mt.active[i])
      for (int c = 0; c < f.ncomp(); ++c) f.comp(c)[i] = 0.0;
}

Field truncate_box(const Field& f, int K) {
  return apply_multiplier(f, [&](const Wave& k, double) {
    for (int a = 0; a < f.g.d; ++a)
      if (std::abs(k[a]) > K) return 0.0;
    return 1.0;
  });
}

int band(const Field& f, double tol) {
  const auto& mt = modes(f.g);
  int b = 0;
  for (std::size_t i = 0; i < f.g.nspec(); ++i)
    for (int c = 0; c < f.ncomp(); ++c)
      if (std::abs(f.comp(c)[i]) > tol)
        for (int a = 0; a < f.g.d; ++a) b = std::max(b, std::abs(mt.k[i][a]));
  return b;
}

Field partial(const Field& f, int axis) {
  Field out(f.g, f.rank);
  const auto& mt = modes(f.g);
  for (std::size_t i = 0; i < f.g.nspec(); ++i) {
    cplx m = mt.active[i] ? cplx(0.0, mt.k[i][axis]) : cplx(0.0);
    for (int c = 0; c < f.ncomp(); ++c) out.comp(c)[i] = m * f.comp(c)[i];
  }
  return out;
}

Field grad(const Field& f) {
  if (f.rank > 1) throw std::invalid_argument("grad of a tensor field");
  const int d = f.g.d;
  Field out(f.g, f.rank + 1);
  const auto& mt = modes(f.g);
  for (std::size_t i = 0; i < f.g.nspec(); ++i) {
    if (!mt.active[i]) continue;
    for (int c = 0; c < f.ncomp(); ++c)
      for (int a = 0; a < d; ++a) out.comp(c * d + a)[i] = cplx(0.0, mt.k[i][a]) * f.comp(c)[i];
  }
  return out;
}

Field div(const Field& f) {
  if (f.rank == 0) throw std::invalid_argument("div of a scalar field");
  const int d = f.g.d;
  Field out(f.g, f.rank - 1);
  const auto& mt = modes(f.g);
  const int rows = f.rank == 1 ? 1 : d;
  for (std::size_t i = 0; i < f.g.nspec(); ++i) {
    if (!mt.active[i]) continue;
    for (int r = 0; r < rows; ++r) {
      cplx s = 0.0;
      for (int a = 0; a < d; ++a) s += cplx(0.0, mt.k[i][a]) * f.comp(r * d + a)[i];
      out.comp(r)[i] = s;
    }
  }
  return out;
}

Field lap(const Field& f) {
  return apply_multiplier(f, [](const Wave&, double k2) { return -k2; });
}

Field inv_lap(const Field& f) {
  return apply_multiplier(f, [](const Wave&, double k2) { return k2 > 0 ? -1.0 / k2 : 0.0; });
}

Field leray(const Field& f) {
  if (f.rank != 1) throw std::invalid_argument("leray needs a vector field");
  const int d = f.g.d;
  Field out(f.g, 1);
  const auto& mt = modes(f.g);
  for (std::size_t i = 0; i < f.g.nspec(); ++i) {
    if (!mt.active[i]) continue;
    if (mt.k2[i] == 0.0) {
      for (int a = 0; a < d; ++a) out.comp(a)[i] = f.comp(a)[i];
      continue;
    }
    cplx kv = 0.0;
    for (int a = 0; a < d; ++a) kv += static_cast<double>(mt.k[i][a]) * f.comp(a)[i];
    kv /= mt.k2[i];
    for (int a = 0; a < d; ++a) out.comp(a)[i] = f.comp(a)[i] - static_cast<double>(mt.k[i][a]) * kv;
  }
  return out;
}

Field component(const Field& f, int i) {
  Field s(f.g, 0);
  std::copy(f.comp(i), f.comp(i) + f.g.nspec(), s.comp(0));
  return s;
}

void set_component(Field& f, int i, const Field& s) { std::copy(s.comp(0), s.comp(0) + f.g.nspec(), f.comp(i)); }

Field trace_free(const Field& T) {
  const int d = T.g.d;
  Field out = T;
  const std::size_t n = T.g.nspec();
  for (std::size_t i = 0; i < n; ++i) {
    cplx tr = 0.0;
    for (int a = 0; a < d; ++a) tr += T.comp(a * d + a)[i];
    tr /= static_cast<double>(d);
    for (int a = 0; a < d; ++a) out.comp(a * d + a)[i] -= tr;
  }
  return out;
}

Field transpose(const Field& T) {
  const int d = T.g.d;
  Field out(T.g, 2);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) std::copy(T.comp(a * d + b), T.comp(a * d + b) + T.g.nspec(), out.comp(b * d + a));
  return out;
}

Field symmetrize(const Field& T) {
  Field out = T + transpose(T);
  return out *= 0.5;
}

cplx mean(const Field& f, int comp_i) { return f.comp(comp_i)[0]; }

Field outer(const Field& u, const Field& v) {
  const int d = u.g.d, M = padded_size(u.g.N);
  Phys pu = to_phys(u, M);
  Phys pv = &u == &v ? pu : to_phys(v, M);
  Phys out(d, M, 2);
  const std::size_t n = out.size();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      auto& o = out.v[a * d + b];
      const auto& x = pu.v[a];
      const auto& y = pv.v[b];
      for (std::size_t i = 0; i < n; ++i) o[i] = x[i] * y[i];
    }
  return from_phys(out, u.g.N);
}

Field tf_outer(const Field& u, const Field& v) { return trace_free(outer(u, v)); }

Field scalar_times(const Field& a, const Field& f) {
  const int M = padded_size(f.g.N);
  Phys pa = to_phys(a, M);
  Phys pf = to_phys(f, M);
  for (auto& comp : pf.v)
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= pa.v[0][i];
  return from_phys(pf, f.g.N);
}

double l2(const Field& f) { return std::sqrt(std::max(inner(f, f), 0.0)); }

double inner(const Field& a, const Field& b) {
  const auto& mt = modes(a.g);
  double s = 0.0;
  for (int c = 0; c < a.ncomp(); ++c) {
    const cplx* x = a.comp(c);
    const cplx* y = b.comp(c);
    for (std::size_t i = 0; i < a.g.nspec(); ++i) s += mt.weight[i] * std::real(x[i] * std::conj(y[i]));
  }
  return s * a.g.volume();
}

double lq_phys(const Phys& p, double q) {
  const std::size_t n = p.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (const auto& c : p.v) m2 += c[i] * c[i];
    double m = std::sqrt(m2);
    if (std::isinf(q))
      acc = std::max(acc, m);
    else
      acc += std::pow(m, q);
  }
  if (std::isinf(q)) return acc;
  double cell = std::pow(2.0 * kPi / p.M, p.d);
  return std::pow(acc * cell, 1.0 / q);
}

double lq(const Field& f, double q, int refine) {
  if (refine == 0) refine = std::isinf(q) ? 2 : 1;
  return lq_phys(to_phys(f, refine * f.g.N), q);
}

double wsr(const Field& f, double s, double r) {
  Field g = apply_multiplier(f, [s](const Wave&, double k2) { return std::pow(1.0 + k2, 0.5 * s); });
  if (r == 2.0) return l2(g);
  return lq(g, r);
}

double cn(const Field& f, int order) {
  const int d = f.g.d;
  double total = 0.0;
  std::vector<int> alpha(d, 0);
  std::function<void(int, int, const Field&)> rec = [&](int axis, int left, const Field& g) {
    if (axis == d - 1) {
      Field h = g;
      for (int j = 0; j < left; ++j) h = partial(h, axis);
      total += lq(h, kInf);
      return;
    }
    Field h = g;
    for (int j = 0; j <= left; ++j) {
      rec(axis + 1, left - j, h);
      h = partial(h, axis);
    }
  };
  for (int m = 0; m <= order; ++m) rec(0, m, f);
  return total;
}

Field rescale(const Field& f, int sigma, int Nout, int B) {
  Grid go{f.g.d, Nout};
  Field out(go, f.rank);
  const auto& mt = modes(f.g);
  for (std::size_t i = 0; i < f.g.nspec(); ++i) {
    if (!mt.active[i]) continue;
    bool keep = true;
    for (int a = 0; a < f.g.d; ++a) keep = keep && std::abs(mt.k[i][a]) <= B;
    if (!keep) continue;
    Wave t{sigma * mt.k[i][0], sigma * mt.k[i][1], sigma * mt.k[i][2]};
    for (int a = 0; a < f.g.d; ++a)
      if (std::abs(t[a]) > Nout / 2 - 1) throw std::invalid_argument("rescaled band exceeds the output grid");
    std::size_t j = spec_index(go, t);
    for (int c = 0; c < f.ncomp(); ++c) out.comp(c)[j] = f.comp(c)[i];
  }
  return out;
}

HolderGap improved_holder_gap(const Field& a, const Field& f, int sigma, double p) {
  if (a.rank != 0 || f.rank != 0) throw std::invalid_argument("improved Holder gap takes scalar fields");
  const int lim = f.g.N / 2 - 1;
  auto tol = [](const Field& x) {
    double m = 0.0;
    for (const cplx& c : x.c) m = std::max(m, std::abs(c));
    return 1e-13 * m;
  };
  const int bf = band(f, tol(f));
  if (sigma * bf + band(a, tol(a)) > lim) throw std::invalid_argument("oscillation aliases on this grid");
  Field fs = rescale(f, sigma, f.g.N, bf);
  Field af = scalar_times(a, fs);
  const double vol = std::pow(f.g.volume(), -1.0 / p);
  auto norm = [p](const Field& x) { return p == 2.0 ? l2(x) : lq(x, p); };
  const double nf = norm(f);
  HolderGap r;
  r.gap = std::abs(norm(af) - vol * norm(a) * nf);
  r.bound = std::pow(sigma, -1.0 / p) * cn(a, 1) * nf * vol;
  return r;
}

double bump_hat(int d, double xi) {
  static std::map<int, double> mass;
  if (!mass.count(d)) mass[d] = bump_hat_raw(d, 0.0);
  return bump_hat_raw(d, xi) / mass[d];
}

std::vector<double> space_mollifier(const Grid& g, double ell) {
  const auto& mt = modes(g);
  std::map<double, double> by_k2;
  std::vector<double> m(g.nspec());
  for (std::size_t i = 0; i < g.nspec(); ++i) {
    auto it = by_k2.find(mt.k2[i]);
    if (it == by_k2.end()) it = by_k2.emplace(mt.k2[i], bump_hat(g.d, ell * std::sqrt(mt.k2[i]))).first;
    m[i] = mt.active[i] ? it->second : 0.0;
  }
  return m;
}

std::vector<double> time_mollifier(double ell, double dt) {
  if (!(ell >= 2.0 * dt * (1.0 - 1e-12))) throw std::invalid_argument("time mollifier needs ell >= 2 dt");
  const int J = static_cast<int>(std::floor(ell / dt + 1e-9));
  std::vector<double> w(J + 1, 0.0);
  double s = 0.0;
  for (int j = 1; j < J + 1; ++j) {
    double x = j * dt / ell;
    w[j] = (x > 0.0 && x < 1.0) ? std::exp(-1.0 / (x * (1.0 - x))) : 0.0;
    s += w[j];
  }
  if (s <= 0.0) throw std::invalid_argument("time mollifier has no interior samples");
  for (auto& x : w) x /= s;
  return w;
}

const Field& Path::at(long n) const {
  if (f.empty()) throw std::out_of_range("empty path");
  if (n < 0) return f.front();
  if (static_cast<std::size_t>(n) >= f.size()) throw std::out_of_range("path frame past the end");
  return f[static_cast<std::size_t>(n)];
}

Field diff_t(const Path& p, long n) {
  Field out = p.at(n + 1) - p.at(n - 1);
  return out *= 0.5 / p.dt;
}

double window_norm(const std::vector<double>& v, double dt, double s, double p) {
  const double a = s / dt, b = (s + 1.0) / dt;
  const long i0 = std::lround(a), i1 = std::lround(b);
  if (std::abs(a - i0) > 1e-6 || std::abs(b - i1) > 1e-6)
    throw std::invalid_argument("window endpoints must lie on the time grid");
  if (i0 < 0 || static_cast<std::size_t>(i1) >= v.size()) throw std::out_of_range("window outside the path");
  if (std::isinf(p)) {
    double m = 0.0;
    for (long i = i0; i <= i1; ++i) m = std::max(m, v[i]);
    return m;
  }
  double acc = 0.0;
  for (long i = i0; i <= i1; ++i) {
    double w = (i == i0 || i == i1) ? 0.5 : 1.0;
    acc += w * std::pow(v[i], p);
  }
  return std::pow(acc * dt, 1.0 / p);
}

// Header: "RNSF", version, dim, rank, N, bytes per real, then t as float64.
// Coefficients follow per component in row-major order of k in [-N/2, N/2)^d.
void write_field(const std::string& file, const Field& f, double t) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file);
  const char magic[4] = {'R', 'N', 'S', 'F'};
  os.write(magic, 4);
  std::uint32_t hdr[5] = {1u, static_cast<std::uint32_t>(f.g.d), static_cast<std::uint32_t>(f.rank),
                          static_cast<std::uint32_t>(f.g.N), 8u};
  os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  os.write(reinterpret_cast<const char*>(&t), sizeof(double));
  const int N = f.g.N, d = f.g.d;
  for (int c = 0; c < f.ncomp(); ++c) {
    Wave k{0, 0, 0};
    std::size_t total = ipow(N, d);
    for (std::size_t j = 0; j < total; ++j) {
      std::size_t r = j;
      for (int a = d - 1; a >= 0; --a) {
        k[a] = static_cast<int>(r % N) - N / 2;
        r /= N;
      }
      cplx v = f.coeff(k, c);
      double re = v.real(), im = v.imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
  }
}

Field read_field(const std::string& file, double* t) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "RNSF", 4) != 0) throw std::runtime_error("bad field file " + file);
  std::uint32_t hdr[5];
  is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  double tt = 0.0;
  is.read(reinterpret_cast<char*>(&tt), sizeof(double));
  if (t) *t = tt;
  Grid g{static_cast<int>(hdr[1]), static_cast<int>(hdr[3])};
  Field f(g, static_cast<int>(hdr[2]));
  const int N = g.N, d = g.d;
  const Wave zero{0, 0, 0};
  for (int c = 0; c < f.ncomp(); ++c) {
    std::size_t total = ipow(N, d);
    for (std::size_t j = 0; j < total; ++j) {
      Wave k = zero;
      std::size_t r = j;
      for (int a = d - 1; a >= 0; --a) {
        k[a] = static_cast<int>(r % N) - N / 2;
        r /= N;
      }
      double re = 0.0, im = 0.0;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      if (k[d - 1] >= 0) {
        bool nyq = false;
        for (int a = 0; a < d; ++a) nyq = nyq || k[a] == -N / 2;
        if (!nyq) f.comp(c)[spec_index(g, k)] = cplx(re, im);
      }
    }
  }
  if (!is) throw std::runtime_error("truncated field file " + file);
  return f;
}

}  // namespace rns
