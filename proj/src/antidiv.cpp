#include "rns/antidiv.hpp"

#include <cmath>
#include <stdexcept>

namespace rns {

Field apply_R(const Field& v) {
  if (v.rank != 1) throw std::invalid_argument("R acts on vector fields");
  const int d = v.g.d;
  const double c1 = (2.0 - d) / (d - 1.0), c2 = 1.0 / (d - 1.0);
  Field out(v.g, 2);
  const auto& mt = modes(v.g);
  const cplx I(0.0, 1.0);
  for (std::size_t n = 0; n < v.g.nspec(); ++n) {
    if (!mt.active[n] || mt.k2[n] == 0.0) continue;
    const Wave& k = mt.k[n];
    const double k2 = mt.k2[n];
    cplx s = 0.0;
    for (int a = 0; a < d; ++a) s += static_cast<double>(k[a]) * v.comp(a)[n];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        cplx r = -c1 * I * s * (static_cast<double>(k[i]) * k[j] / (k2 * k2));
        if (i == j) r += c2 * I * s / k2;
        r -= I * (static_cast<double>(k[i]) * v.comp(j)[n] + static_cast<double>(k[j]) * v.comp(i)[n]) / k2;
        out.comp(i * d + j)[n] = r;
      }
  }
  return out;
}

Field apply_B(const Field& v, const Field& M) {
  if (v.rank != 1 || M.rank != 2) throw std::invalid_argument("B takes a vector and a tensor");
  const int d = v.g.d;
  double scale = l2(M) + 1.0;
  for (int c = 0; c < M.ncomp(); ++c)
    if (std::abs(mean(M, c)) > 1e-12 * scale) throw std::invalid_argument("B requires a mean-zero tensor");

  // Products are formed on the padded grid and truncated before the outer R.
  const int P = padded_size(v.g.N);
  Phys pv = to_phys(v, P);
  Phys pg = to_phys(grad(v), P);  // component l*d+j holds d_j v^l
  Phys first(d, P, 2), w(d, P, 1);
  for (int l = 0; l < d; ++l) {
    Field col(v.g, 1);
    for (int k = 0; k < d; ++k) set_component(col, k, component(M, k * d + l));
    Phys T = to_phys(apply_R(col), P);
    const std::size_t n = T.size();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto& t = T.v[i * d + j];
        const auto& vl = pv.v[l];
        const auto& dv = pg.v[l * d + j];
        auto& f = first.v[i * d + j];
        auto& wi = w.v[i];
        for (std::size_t x = 0; x < n; ++x) {
          f[x] += vl[x] * t[x];
          wi[x] += dv[x] * t[x];
        }
      }
  }
  Field B = from_phys(first, v.g.N);
  for (int c = 0; c < B.ncomp(); ++c) B.comp(c)[0] = 0.0;
  B -= apply_R(from_phys(w, v.g.N));
  return B;
}

AntiDivReport check_antidiv(const Field& v, const Field& M) {
  AntiDivReport r;
  const int d = v.g.d;
  Field vm = v;
  for (int a = 0; a < d; ++a) vm.comp(a)[0] = 0.0;
  Field Rv = apply_R(v);
  r.div_R = l2(div(Rv) - vm) / std::max(l2(vm), 1e-300);
  Field tr(v.g, 0);
  for (int a = 0; a < d; ++a) tr += component(Rv, a * d + a);
  r.trace_R = lq(tr, kInf);
  r.sym_R = l2(Rv - transpose(Rv)) / std::max(l2(Rv), 1e-300);
  // The Laplacian relation needs a solenoidal field; the general symbol adds
  // gradient terms in k.v.
  Field sv = leray(v);
  Field gv = grad(sv);
  r.R_lap = l2(apply_R(lap(sv)) - gv - transpose(gv)) / std::max(l2(gv), 1e-300);

  // M v on the padded grid, truncated like the products inside B.
  Field Mv(v.g, 1);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      Field s = scalar_times(component(v, l), component(M, i * d + l));
      Field acc = component(Mv, i) + s;
      set_component(Mv, i, acc);
    }
  for (int a = 0; a < d; ++a) Mv.comp(a)[0] = 0.0;
  Field B = apply_B(v, M);
  r.div_B = l2(div(B) - Mv) / std::max(l2(Mv), 1e-300);
  r.B_ratio = l2(B) / std::max(cn(v, 1) * l2(M), 1e-300);
  return r;
}

}  // namespace rns
