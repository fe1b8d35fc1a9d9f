#include "rns/convex.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rns/antidiv.hpp"

namespace rns {

namespace {

Field dt_diff(const Path& p, long n) { return (1.0 / (2.0 * p.dt)) * (p.at(n + 1) - p.at(n - 1)); }

double frob_at(const Phys& T, std::size_t i) {
  double s = 0.0;
  for (const auto& c : T.v) s += c[i] * c[i];
  return std::sqrt(s);
}

}  // namespace

double chi(double r, int q) {
  const double eps = std::pow(4.0, -(q + 1));
  if (r <= eps) return eps;
  if (r >= 2.0 * eps) return r;
  const double s = smoothstep((r - eps) / eps);
  return (1.0 - s) * eps + s * r;
}

const char* component_name(int c) {
  static const char* names[] = {"com_ell", "com", "far", "osc_x", "osc_t", "lin", "cor", "cut"};
  return names[c];
}

std::vector<std::string> check_theta(double theta, int d, double p, double r) {
  std::vector<std::string> bad;
  auto req = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const double a = 1.0 / p - 0.5;
  req(theta > 0.0 && theta < 1.0 / (2 * d + 9), "0 < theta < 1/(2d+9)");
  req((d + 3) * theta <= std::min(2.0 * a, (d - 1) / (4.0 * r)), "(d+3) theta <= min{2(1/p-1/2), (d-1)/(4r)}");
  req(1.0 / (2.0 * theta) >= (4 * d + 7) * theta + (d - 1) / 2.0, "1/(2 theta) >= (4d+7) theta + (d-1)/2");
  req(a * (1.0 + d - (5 * d + 17) * theta) >= (d + 3) / 2.0 * theta, "(1/p-1/2)(1+d-(5d+17) theta) >= (d+3) theta/2");
  req(a / theta >= (d - 1) / 2.0, "(1/p-1/2)/theta >= (d-1)/2");
  req((d - 1) / r >= (4 * d + 12) * theta, "(d-1)/r >= (4d+12) theta");
  return bad;
}

StepParams schedule_params(int q, double lambda, double theta, int d, double p, double r, double nu,
                           const Overrides& ov) {
  StepParams s;
  s.q = q;
  s.d = d;
  s.lambda = lambda;
  s.theta = theta;
  s.nu = nu;
  s.violations = check_theta(theta, d, p, r);
  if (!s.violations.empty()) {
    std::string msg = "parameter constraints violated:";
    for (auto& v : s.violations) msg += " [" + v + "]";
    throw std::invalid_argument(msg);
  }
  s.ell = std::pow(lambda, -theta);
  s.mu = lambda;
  s.sigma = std::ceil(std::pow(lambda, 1.0 / (2.0 * theta)));
  s.kappa = std::pow(lambda, 1.0 + d - (5 * d + 17) * theta + 1.0 / theta);
  s.varsigma = std::ceil(std::pow(lambda, (d + 6) * theta));
  auto apply = [&](double o, double& x) {
    if (o > 0.0) {
      if (o > x) throw std::invalid_argument("overrides may only shrink parameters");
      x = o;
      s.full_schedule = false;
    }
  };
  apply(ov.mu, s.mu);
  apply(ov.sigma, s.sigma);
  apply(ov.kappa, s.kappa);
  apply(ov.varsigma, s.varsigma);
  if (ov.ell > 0.0) {
    s.ell = ov.ell;
    s.full_schedule = false;
  }
  return s;
}

Field frame_residual(const Path& v, const Path& R, const Path& z, double nu, long n, double* scale) {
  Field vz = v.at(n) + z.at(n);
  Field dv = dt_diff(v, n);
  Field nl = leray(div(tf_outer(vz, vz)));
  Field lp = nu * lap(v.at(n));
  Field dR = leray(div(R.at(n)));
  Field r = dv + nl - lp - z.at(n) - dR;
  if (scale) *scale = l2(dv) + l2(nl) + l2(lp) + l2(z.at(n)) + l2(dR);
  return r;
}

ResidualReport residual_certificate(const Path& v, const Path& R, const Path& z, double nu) {
  ResidualReport rep;
  const long F = static_cast<long>(std::min(v.size(), R.size()));
  if (F > 0) rep.edge = l2(frame_residual(v, R, z, nu, 0));
  for (long n = 1; n + 1 < F; ++n) {
    double sc = 0.0;
    double e = l2(frame_residual(v, R, z, nu, n, &sc));
    rep.per_frame.push_back(e);
    if (e > rep.max_abs) {
      rep.max_abs = e;
      rep.worst_frame = static_cast<int>(n);
    }
    rep.balance = std::max(rep.balance, sc);
  }
  double vmax = 0.0, Rmax = 0.0;
  for (long n = 0; n < F; ++n) {
    vmax = std::max(vmax, l2(v.f[n]));
    Rmax = std::max(Rmax, l2(R.f[n]));
  }
  rep.scale = vmax + Rmax;
  rep.relative = rep.max_abs / (1.0 + rep.scale);
  return rep;
}

namespace {

Path fourth_order_derivative(const Path& w) {
  const long F = static_cast<long>(w.size());
  if (F < 5) throw std::invalid_argument("need at least five frames for the time derivative");
  Path d;
  d.dt = w.dt;
  const double h = 12.0 * w.dt;
  for (long n = 0; n < F; ++n) {
    auto f = [&](long m) -> const Field& { return w.f[m]; };
    Field out(w.f[0].g, w.f[0].rank);
    if (n >= 2 && n + 2 < F) {
      out.axpy(-1.0, f(n + 2));
      out.axpy(8.0, f(n + 1));
      out.axpy(-8.0, f(n - 1));
      out.axpy(1.0, f(n - 2));
    } else {
      // One-sided five-point stencils at the ends.
      static const double c0[5] = {-25, 48, -36, 16, -3}, c1[5] = {-3, -10, 18, -6, 1};
      const bool left = n < 2;
      const long off = left ? n : F - 1 - n;
      const double* c = off == 0 ? c0 : c1;
      for (int j = 0; j < 5; ++j) out.axpy(left ? c[j] : -c[j], f(left ? j : F - 1 - j));
    }
    out *= 1.0 / h;
    d.f.push_back(std::move(out));
  }
  return d;
}

}  // namespace

IterationState initial_state(const Path& w, const Path& z, double nu, const Path& dw) {
  if (w.size() == 0) throw std::invalid_argument("empty initial path");
  double scale = 0.0;
  for (const auto& f : w.f) scale = std::max(scale, l2(f));
  if (l2(w.f.front()) > 1e-14 * std::max(scale, 1.0)) throw std::invalid_argument("initial field must vanish at t = 0");
  Path d = dw.size() == w.size() ? dw : fourth_order_derivative(w);
  IterationState s;
  s.q = 0;
  s.nu = nu;
  s.v = w;
  s.R.dt = w.dt;
  for (std::size_t n = 0; n < w.size(); ++n) {
    Field wz = w.f[n] + z.at(static_cast<long>(n));
    Field src = d.f[n] - nu * lap(w.f[n]) - z.at(static_cast<long>(n));
    s.R.f.push_back(apply_R(src) + tf_outer(wz, wz));
  }
  return s;
}

Path default_w(const Grid& g, double dt, int frames, double amp, Path* dw) {
  Phys shape(g.d, g.N, 1);
  const double h = 2.0 * kPi / g.N;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    double x[3] = {0, 0, 0};
    std::size_t r = i;
    for (int a = g.d - 1; a >= 0; --a) {
      x[a] = h * static_cast<double>(r % g.N);
      r /= g.N;
    }
    // (sin x_2, sin x_1) in 2D, the cyclic (sin x_2, sin x_3, sin x_1) in 3D: divergence-free.
    for (int a = 0; a < g.d; ++a) shape.v[a][i] = std::sin(x[(a + 1) % g.d]);
  }
  Field f = from_phys(shape, g.N);
  f *= amp;
  Path w;
  w.dt = dt;
  if (dw) {
    dw->dt = dt;
    dw->f.clear();
  }
  for (int n = 0; n < frames; ++n) {
    const double t = n * dt, s = std::sin(0.5 * kPi * t), c = std::cos(0.5 * kPi * t);
    w.f.push_back(std::pow(s, 4) * f);
    if (dw) dw->f.push_back((2.0 * kPi * s * s * s * c) * f);
  }
  return w;
}

Amplitudes amplitudes(const Basis& basis, const Field& R_ell, int q, int B_a) {
  const Grid g = R_ell.g;
  const int d = g.d;
  Phys pR = to_phys(R_ell, g.N);
  Phys rho(d, g.N, 0);
  std::vector<Phys> b(basis.size(), Phys(d, g.N, 0));
  Amplitudes out;
  std::vector<double> c(basis.size());
  double S[9];
  for (std::size_t i = 0; i < pR.size(); ++i) {
    const double r = frob_at(pR, i);
    const double rh = 4.0 * chi(r, q);
    out.ball = std::max(out.ball, r / rh);
    rho.v[0][i] = rh;
    for (int a = 0; a < d; ++a)
      for (int e = 0; e < d; ++e) S[a * d + e] = (a == e ? 1.0 : 0.0) - pR.v[a * d + e][i] / rh;
    gamma_sq(basis, S, c.data());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (c[k] < 0.0) throw std::domain_error("negative geometric coefficient");
      b[k].v[0][i] = std::sqrt(rh * c[k]);
    }
  }
  out.rho = from_phys(rho, g.N);
  for (auto& p : b) out.b.push_back(truncate_box(from_phys(p, g.N), B_a));
  return out;
}

OscillatedFamily oscillate_family(const MikadoFamily& f, int sigma, int N, int B_W) {
  if (2 * sigma * B_W > N / 2 - 1) throw std::invalid_argument("oscillated family products alias on this grid");
  MikadoFamily t = truncate_family(f, B_W);
  OscillatedFamily o;
  o.B_W = B_W;
  const double s = std::sqrt(Grid{f.g.d, N}.volume());
  for (std::size_t k = 0; k < t.size(); ++k) {
    Field W = rescale(t.W[k], sigma, N, B_W);
    Field V = rescale(t.V[k], sigma, N, B_W);
    W *= s;
    V *= s;
    Field WW = outer(W, W);
    Field M(WW.g, 2);
    for (int c = 0; c < WW.ncomp(); ++c) M.comp(c)[0] = WW.comp(c)[0];
    o.W.push_back(std::move(W));
    o.V.push_back(std::move(V));
    o.WW.push_back(std::move(WW));
    o.M.push_back(std::move(M));
  }
  return o;
}

namespace {

// Per-frame quantities of the new iterate.
struct Frame {
  long n = 0;
  double theta = 0.0, H = 0.0;
  Field vl, zl, Rl, ul;
  bool active = false;  // perturbation computed (cutoff nonzero nearby)
  std::vector<Field> a2;
  Field wp, wc, wpc, Y, wt, om, diag, vnew;
  double geo = 0.0, ball = 0.0;
};

class Stepper {
 public:
  Stepper(const IterationState& s, const StepParams& p, const Path& z, const StepGrid& grid)
      : s_(s), p_(p), z_(z) {
    g_ = s.v.f.at(0).g;
    d_ = g_.d;
    dt_ = s.v.dt;
    F_ = static_cast<long>(std::min(s.v.size(), s.R.size()));
    if (static_cast<long>(z.size()) < F_) throw std::invalid_argument("noise path shorter than the iterate");
    sigma_ = static_cast<int>(std::lround(p.sigma));
    const int varsigma = static_cast<int>(std::lround(p.varsigma));
    if (sigma_ < 1 || varsigma < 1) throw std::invalid_argument("oscillation parameters must be positive integers");
    const int lim = g_.N / 2 - 1;
    B_W_ = grid.B_W > 0 ? grid.B_W : lim / (2 * sigma_);
    B_a_ = grid.B_a > 0 ? grid.B_a : lim / 4;
    if (B_W_ < 1) throw std::invalid_argument("grid too coarse for this oscillation");
    if (2 * B_a_ > lim || B_a_ + sigma_ * B_W_ > lim || 2 * sigma_ * B_W_ > lim)
      throw std::invalid_argument("amplitude and family bands alias on this grid");
    basis_ = make_basis(d_);
    int fN = grid.family_N > 0 ? grid.family_N : std::max(64, static_cast<int>(std::ceil(8.0 * p.mu)));
    fN += fN % 2;
    MikadoFamily fam = build_mikado(basis_, p.mu, fN, grid.cache_dir);
    osc_ = oscillate_family(fam, sigma_, g_.N, B_W_);
    P_ = padded_size(g_.N);
    for (std::size_t k = 0; k < osc_.W.size(); ++k) {
      pW_.push_back(to_phys(osc_.W[k], P_));
      pV_.push_back(to_phys(osc_.V[k], P_));
      WWm_.push_back(osc_.WW[k] - osc_.M[k]);
    }
    prof_ = TemporalProfile{p.kappa, varsigma};
    cut_ = build_cutoff(p.ell, dt_);
    wt_ = time_mollifier(p.ell, dt_);
    sm_ = space_mollifier(g_, p.ell);
  }

  double theta(long m) const { return m <= 0 ? cut_(0.0) : cut_(m * dt_); }
  double H(long m) const { return prof_.H(m * dt_); }
  double ghat2(long m) const { return 1.0 + (H(m + 1) - H(m - 1)) / (2.0 * dt_); }

  Field mollify(const Path& x, long m) const {
    Field out(x.f.at(0).g, x.f.at(0).rank);
    for (std::size_t j = 1; j < wt_.size(); ++j) out.axpy(wt_[j], x.at(m - static_cast<long>(j)));
    return smooth(out);
  }
  Field smooth(Field f) const {
    const std::size_t ns = f.g.nspec();
    for (int c = 0; c < f.ncomp(); ++c)
      for (std::size_t i = 0; i < ns; ++i) f.comp(c)[i] *= sm_[i];
    return f;
  }

  // Mollified nonlinearity of the previous iterate; products for the last J+1 frames are kept.
  Field mollified_product(long n) {
    Field out(g_, 2);
    for (std::size_t j = 1; j < wt_.size(); ++j) {
      long m = std::max(n - static_cast<long>(j), 0L);
      auto it = prod_.find(m);
      if (it == prod_.end()) {
        Field vz = s_.v.at(m) + z_.at(m);
        it = prod_.emplace(m, tf_outer(vz, vz)).first;
      }
      out.axpy(wt_[j], it->second);
    }
    while (!prod_.empty() && prod_.begin()->first < n - static_cast<long>(wt_.size())) prod_.erase(prod_.begin());
    return smooth(out);
  }

  Frame frame(long m) const {
    Frame f;
    f.n = m;
    f.theta = theta(m);
    f.H = H(m);
    f.vl = mollify(s_.v, m);
    f.zl = mollify(z_, m);
    f.Rl = mollify(s_.R, m);
    f.ul = f.vl + f.zl;
    f.Y = leray(div(f.Rl));
    f.wt = f.H * f.Y;
    f.active = theta(m - 1) > 0.0 || f.theta > 0.0 || theta(m + 1) > 0.0;
    f.wp = Field(g_, 1);
    f.wc = Field(g_, 1);
    f.diag = Field(g_, 2);
    if (f.active) perturb(f);
    f.wpc = f.wp + f.wc;
    f.om = f.theta * f.wpc + (f.theta * f.theta) * f.wt;
    f.vnew = f.vl + f.om;
    return f;
  }

  void perturb(Frame& f) const {
    Amplitudes am = amplitudes(basis_, f.Rl, p_.q, B_a_);
    f.ball = am.ball;
    const double gh2 = ghat2(f.n), gh = std::sqrt(std::max(gh2, 0.0));
    Phys wp(d_, P_, 1), wc(d_, P_, 1), dg(d_, P_, 2);
    const std::size_t n = wp.size();
    Field sum(g_, 2);
    for (std::size_t k = 0; k < osc_.W.size(); ++k) {
      Field a = gh * am.b[k];
      Phys pa = to_phys(a, P_);
      Phys ga = to_phys(grad(a), P_);
      Phys a2(d_, P_, 0);
      const auto& W = pW_[k].v;
      const auto& V = pV_[k].v;
      double pk[3];
      for (std::size_t x = 0; x < n; ++x) {
        const double av = pa.v[0][x];
        a2.v[0][x] = av * av;
        for (int i = 0; i < d_; ++i) {
          pk[i] = av * W[i][x];
          wp.v[i][x] += pk[i];
          double s = 0.0;
          for (int j = 0; j < d_; ++j) s += ga.v[j][x] * V[i * d_ + j][x];
          wc.v[i][x] += s / sigma_;
        }
        for (int i = 0; i < d_; ++i)
          for (int j = 0; j < d_; ++j) dg.v[i * d_ + j][x] += pk[i] * pk[j];
      }
      f.a2.push_back(from_phys(a2, g_.N));
      Field b2 = scalar_times(am.b[k], am.b[k]);
      for (int c = 0; c < d_ * d_; ++c) {
        const double m = osc_.M[k].comp(c)[0].real();
        if (m == 0.0) continue;
        cplx* dst = sum.comp(c);
        const cplx* src = b2.comp(0);
        for (std::size_t i = 0; i < g_.nspec(); ++i) dst[i] += m * src[i];
      }
    }
    f.wp = from_phys(wp, g_.N);
    f.wc = from_phys(wc, g_.N);
    f.diag = trace_free(from_phys(dg, g_.N));
    // Geometric identity: sum_k b_k^2 M_k = rho Id - R_ell up to the band truncation of b_k.
    Field target = (-1.0) * f.Rl;
    for (int a = 0; a < d_; ++a) {
      Field t = component(target, a * d_ + a) + am.rho;
      set_component(target, a * d_ + a, t);
    }
    f.geo = l2(sum - target) / std::max(l2(target), 1e-300);
  }

  StepResult run(bool keep) {
    StepResult out;
    auto& next = out.next;
    next.q = s_.q + 1;
    next.nu = s_.nu;
    next.history = s_.history;
    next.history.push_back(p_);
    next.full_schedule = s_.full_schedule && p_.full_schedule;
    next.v.dt = next.R.dt = dt_;
    StepDiagnostics& dg = out.diag;
    dg.B_a = B_a_;
    dg.B_W = B_W_;
    if (keep)
      for (auto& c : out.components) c.dt = dt_;
    out.omega_p.dt = out.omega_c.dt = out.omega_t.dt = dt_;
    const double nu = s_.nu, inv2dt = 1.0 / (2.0 * dt_);
    Frame prev = frame(-1), cur = frame(0);
    const long Fout = F_ - 1;
    std::array<double, 4> l2acc{};
    for (long n = 0; n < Fout; ++n) {
      Frame nxt = frame(n + 1);
      const double th = cur.theta, th2 = th * th;
      const double thp = nxt.theta, thm = prev.theta;
      const double A_th2 = 0.5 * (thp * thp + thm * thm), D_th2 = (thp * thp - thm * thm) * inv2dt;
      const double DH = (nxt.H - prev.H) * inv2dt, AH = 0.5 * (nxt.H + prev.H);
      std::array<Field, kNumComponents> C;
      C[kComL] = tf_outer(cur.ul, cur.ul) - mollified_product(n);
      const Field wpt = th * cur.wp, wct = th * cur.wc, wtt = th2 * cur.wt;
      if (cur.active) {
        C[kFar] = th2 * (tf_outer(cur.wp, cur.wp) - cur.diag);
        Field ox(g_, 2);
        if (th2 > 0.0)
          for (std::size_t k = 0; k < WWm_.size(); ++k) ox += apply_B(grad(cur.a2[k]), WWm_[k]);
        C[kOscX] = th2 * ox;
      } else {
        C[kFar] = Field(g_, 2);
        C[kOscX] = Field(g_, 2);
      }
      Field dRl = inv2dt * (nxt.Rl - prev.Rl);
      Field aRl = 0.5 * (nxt.Rl + prev.Rl) - cur.Rl;
      C[kOscT] = A_th2 * (AH * dRl + DH * aRl);
      Field dwpc = inv2dt * (nxt.wpc - prev.wpc);
      Field lin_src = th * dwpc - nu * lap(cur.om) + (cur.zl - z_.at(n));
      C[kLin] = apply_R(lin_src) + tf_outer(cur.ul, cur.om) + tf_outer(cur.om, cur.ul);
      Field ct = wct + wtt;
      C[kCor] = tf_outer(ct, cur.om) + tf_outer(wpt, ct);
      Field dz = z_.at(n) - cur.zl;
      Field vz = cur.vnew + cur.zl;
      C[kCom] = tf_outer(vz, dz) + tf_outer(dz, vz) + tf_outer(dz, dz);
      Field rem = inv2dt * (thp * nxt.wpc - thm * prev.wpc) - th * dwpc;
      Field awt = 0.5 * (nxt.wt + prev.wt);
      C[kCut] = (1.0 - th2) * cur.Rl + ((A_th2 - th2) * DH) * cur.Rl + apply_R(D_th2 * awt) + apply_R(rem);

      Field Rn(g_, 2);
      for (int c = 0; c < kNumComponents; ++c) {
        Rn += C[c];
        const double w = (n == 0 || n == Fout - 1) ? 0.5 : 1.0;
        dg.l1l1[c] += w * dt_ * lq(C[c], 1.0);
      }
      const double w = (n == 0 || n == Fout - 1) ? 0.5 : 1.0;
      const Field* pert[4] = {&wpt, &wct, &wtt, &cur.om};
      for (int i = 0; i < 4; ++i) {
        double v = l2(*pert[i]);
        l2acc[i] += w * dt_ * v * v;
      }
      if (cur.active) {
        double gpc = l2(grad(cur.wpc));
        if (gpc > 0.0) dg.div_pc = std::max(dg.div_pc, l2(div(cur.wpc)) / gpc);
        if (th2 > 0.0) dg.geo_identity = std::max(dg.geo_identity, cur.geo);
        dg.ball = std::max(dg.ball, cur.ball);
      }
      next.v.f.push_back(cur.vnew);
      next.R.f.push_back(std::move(Rn));
      if (keep) {
        for (int c = 0; c < kNumComponents; ++c) out.components[c].f.push_back(std::move(C[c]));
        out.omega_p.f.push_back(wpt);
        out.omega_c.f.push_back(wct);
        out.omega_t.f.push_back(wtt);
      }
      prev = std::move(cur);
      cur = std::move(nxt);
    }
    for (int i = 0; i < 4; ++i) dg.pert_l2l2[i] = std::sqrt(l2acc[i]);
    dg.certificate = residual_certificate(next.v, next.R, z_, nu);
    return out;
  }

 private:
  const IterationState& s_;
  StepParams p_;
  const Path& z_;
  Grid g_;
  int d_ = 2;
  double dt_ = 0.0;
  long F_ = 0;
  int sigma_ = 1, B_W_ = 0, B_a_ = 0, P_ = 0;
  Basis basis_;
  OscillatedFamily osc_;
  std::vector<Phys> pW_, pV_;
  std::vector<Field> WWm_;
  TemporalProfile prof_;
  TimeCutoff cut_;
  std::vector<double> wt_, sm_;
  std::map<long, Field> prod_;
};

}  // namespace

StepResult step(const IterationState& s, const StepParams& p, const Path& z, const StepGrid& grid) {
  Stepper st(s, p, z, grid);
  return st.run(grid.keep_components);
}

CampaignReport run_campaign(const CampaignConfig& c) {
  const Grid g{c.d, c.N};
  const int frames = static_cast<int>(std::lround(c.T / c.dt)) + 1;
  const int S = std::max(c.samples, 1);
  // per sample, per step: l1l1 components, l2l2 perturbations, certificate
  struct Out {
    std::vector<StepDiagnostics> diag;
  };
  std::vector<Out> outs(S);
  auto work = [&](int sample) {
    Path z = sample_z_path(Field(g, 1), c.noise, c.T, c.dt, c.seed, static_cast<int>(c.nu), sample);
    Path dw;
    Path w = default_w(g, c.dt, frames, c.w_amp, &dw);
    IterationState st = initial_state(w, z, c.nu, dw);
    for (int q = 0; q < c.steps; ++q) {
      StepParams p = c.params;
      p.q = q;
      p.d = c.d;
      p.nu = c.nu;
      StepGrid grid = c.grid;
      grid.keep_components = false;
      StepResult r = step(st, p, z, grid);
      outs[sample].diag.push_back(r.diag);
      st = std::move(r.next);
    }
  };
  const int W = std::max(1, std::min(c.workers, S));
  std::vector<std::thread> pool;
  for (int t = 0; t < W; ++t)
    pool.emplace_back([&, t] {
      for (int s = t; s < S; s += W) work(s);
    });
  for (auto& t : pool) t.join();

  CampaignReport rep;
  auto add = [&](int q, const std::string& comp, const std::string& norm, const std::function<double(int)>& val) {
    double m = 0.0, m2 = 0.0;
    for (int s = 0; s < S; ++s) {
      double v = val(s);
      m += v;
      m2 += v * v;
    }
    m /= S;
    double var = S > 1 ? std::max(m2 / S - m * m, 0.0) * S / (S - 1) : 0.0;
    rep.rows.push_back({q, comp, norm, m, std::sqrt(var / S)});
  };
  static const char* pert[4] = {"omega_p", "omega_c", "omega_t", "omega"};
  for (int q = 0; q < c.steps; ++q) {
    for (int k = 0; k < kNumComponents; ++k)
      add(q, component_name(k), "L1L1", [&](int s) { return outs[s].diag[q].l1l1[k]; });
    for (int k = 0; k < 4; ++k) add(q, pert[k], "L2L2", [&](int s) { return outs[s].diag[q].pert_l2l2[k]; });
    add(q, "residual", "relative", [&](int s) { return outs[s].diag[q].certificate.relative; });
    double worst = 0.0;
    for (int s = 0; s < S; ++s) worst = std::max(worst, outs[s].diag[q].certificate.relative);
    rep.residuals.push_back(worst);
  }
  return rep;
}

void write_campaign_csv(const std::string& file, const CampaignReport& r) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  out << "q,component,norm,estimate,stderr\n";
  for (const auto& row : r.rows)
    out << row.q << "," << row.component << "," << row.norm << "," << row.estimate << "," << row.stderr_ << "\n";
}

}  // namespace rns
