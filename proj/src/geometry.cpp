#include "rns/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rns {

namespace {

double halton(int i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

std::vector<Wave> default_dirs(int d) {
  if (d == 2) return {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}};
  return {{1, 1, 0}, {1, -1, 0}, {0, 1, 1}, {0, 1, -1}, {1, 0, 1}, {1, 0, -1}};
}

std::vector<Wave> extension_dirs() {
  return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
}

// Maximizes sum log c over the fiber {E c = v, c > 0} starting from c0 > 0 in
// the fiber of v0, moving v0 -> v in stages so every Newton solve starts
// feasible. Returns false if positivity is lost.
bool analytic_center(const Basis& b, const Eigen::VectorXd& v, Eigen::VectorXd& c) {
  const Eigen::VectorXd v0 = b.E * b.center_id;
  Eigen::VectorXd y = b.null.transpose() * (b.center_id - b.pinv * v0);
  const int stages = 4;
  for (int s = 1; s <= stages; ++s) {
    Eigen::VectorXd vs = v0 + (v - v0) * (static_cast<double>(s) / stages);
    Eigen::VectorXd cp = b.pinv * vs;
    Eigen::VectorXd cc = cp + b.null * y;
    if (cc.minCoeff() <= 0.0) return false;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd inv = cc.cwiseInverse();
      Eigen::VectorXd g = b.null.transpose() * inv;
      Eigen::MatrixXd H = b.null.transpose() * inv.cwiseAbs2().asDiagonal() * b.null;
      Eigen::VectorXd step = H.ldlt().solve(g);
      double dec = g.dot(step);
      double t = 1.0;
      while ((cp + b.null * (y + t * step)).minCoeff() <= 0.0) t *= 0.5;
      y += t * step;
      cc = cp + b.null * y;
      if (dec < 1e-26) break;
    }
  }
  c = b.pinv * v + b.null * y;
  return c.minCoeff() > 0.0;
}

Eigen::VectorXd random_ball_vec(int D, std::mt19937_64& rng, bool boundary) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  Eigen::VectorXd s(D);
  for (int i = 0; i < D; ++i) s[i] = n01(rng);
  double r = boundary ? 0.5 : 0.5 * std::pow(u01(rng), 1.0 / D);
  return s * (r / s.norm());
}

void vec_to_sym(int d, const Eigen::VectorXd& v, double* M) {
  for (int i = 0; i < d; ++i) M[i * d + i] = v[i];
  int o = d;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      M[i * d + j] = M[j * d + i] = v[o] / std::sqrt(2.0);
      ++o;
    }
}

}  // namespace

void sym_to_vec(int d, const double* M, double* v) {
  for (int i = 0; i < d; ++i) v[i] = M[i * d + i];
  int o = d;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) v[o++] = std::sqrt(2.0) * 0.5 * (M[i * d + j] + M[j * d + i]);
}

Basis make_basis(int d, const std::vector<Wave>& dirs) {
  Basis b;
  b.d = d;
  b.D = d * (d + 1) / 2;
  b.k = dirs;
  const int n = static_cast<int>(dirs.size());
  b.E.resize(b.D, n);
  for (int c = 0; c < n; ++c) {
    std::array<double, 3> e{0, 0, 0};
    double nk = 0.0;
    for (int a = 0; a < d; ++a) nk += static_cast<double>(dirs[c][a]) * dirs[c][a];
    nk = std::sqrt(nk);
    for (int a = 0; a < d; ++a) e[a] = dirs[c][a] / nk;
    b.e.push_back(e);
    double M[9];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M[i * d + j] = e[i] * e[j];
    double v[6];
    sym_to_vec(d, M, v);
    for (int r = 0; r < b.D; ++r) b.E(r, c) = v[r];
    b.p.push_back({halton(c + 1, 2), halton(c + 1, 3), d == 3 ? halton(c + 1, 5) : 0.0});
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b.E);
  if (cod.rank() < b.D) throw std::invalid_argument("directions do not span the symmetric matrices");
  b.pinv = cod.pseudoInverse();
  double I[9] = {0};
  for (int i = 0; i < d; ++i) I[i * d + i] = 1.0;
  double vid[6];
  sym_to_vec(d, I, vid);
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vid, b.D);
  b.center_id = b.pinv * v;
  if (d == 3 && n > b.D) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b.E);
    Eigen::MatrixXd K = lu.kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    b.null = qr.householderQ() * Eigen::MatrixXd::Identity(n, K.cols());
    if (b.center_id.minCoeff() <= 0.0) throw std::runtime_error("no positive representation of Id");
    Eigen::VectorXd c;
    if (!analytic_center(b, v, c)) throw std::runtime_error("analytic center at Id failed");
    b.center_id = c;
  }
  return b;
}

Basis make_basis(int d) {
  if (d == 2) return make_basis(2, default_dirs(2));
  std::vector<Wave> dirs = default_dirs(3);
  for (const Wave& extra : extension_dirs()) {
    if (static_cast<int>(dirs.size()) > 6) {
      try {
        Basis b = make_basis(3, dirs);
        if (certify_positivity(b, 4000, 1).ok) return b;
      } catch (const std::exception&) {
      }
    }
    dirs.push_back(extra);
  }
  Basis b = make_basis(3, dirs);
  if (!certify_positivity(b, 4000, 1).ok) throw std::runtime_error("no positive direction set found");
  return b;
}

void gamma_sq(const Basis& b, const double* R, double* c) {
  double v[6];
  sym_to_vec(b.d, R, v);
  Eigen::Map<const Eigen::VectorXd> vv(v, b.D);
  const int n = static_cast<int>(b.size());
  if (b.affine()) {
    Eigen::VectorXd cc = b.pinv * vv;
    for (int i = 0; i < n; ++i) c[i] = cc[i];
    return;
  }
  Eigen::VectorXd cc;
  if (!analytic_center(b, vv, cc)) throw std::domain_error("matrix outside the representable region");
  for (int i = 0; i < n; ++i) c[i] = cc[i];
}

PositivityReport certify_positivity(const Basis& b, int samples, std::uint64_t seed) {
  PositivityReport rep;
  rep.samples = samples;
  const int n = static_cast<int>(b.size()), d = b.d;
  if (b.affine()) {
    rep.analytic_min = kInf;
    for (int i = 0; i < n; ++i) rep.analytic_min = std::min(rep.analytic_min, b.center_id[i] - 0.5 * b.pinv.row(i).norm());
  }
  std::mt19937_64 rng(seed);
  rep.sampled_min = kInf;
  std::vector<double> c(n);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd sv = random_ball_vec(b.D, rng, true);
    double R[9];
    vec_to_sym(d, sv, R);
    for (int i = 0; i < d; ++i) R[i * d + i] += 1.0;
    try {
      gamma_sq(b, R, c.data());
    } catch (const std::domain_error&) {
      rep.sampled_min = -kInf;
      break;
    }
    for (double x : c) rep.sampled_min = std::min(rep.sampled_min, x);
  }
  rep.ok = rep.sampled_min > 0.0 && (!b.affine() || rep.analytic_min > 0.0);
  return rep;
}

double decomposition_error(const Basis& b, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = b.d, n = static_cast<int>(b.size());
  std::vector<double> c(n);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd sv = random_ball_vec(b.D, rng, false);
    double R[9];
    vec_to_sym(d, sv, R);
    for (int i = 0; i < d; ++i) R[i * d + i] += 1.0;
    gamma_sq(b, R, c.data());
    double err = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = -R[i * d + j];
        for (int m = 0; m < n; ++m) acc += c[m] * b.e[m][i] * b.e[m][j];
        err += acc * acc;
      }
    worst = std::max(worst, std::sqrt(err));
  }
  return worst;
}

double line_distance(const Basis& b, int i, const std::array<double, 3>& y) {
  const Wave& k = b.k[i];
  const auto& p = b.p[i];
  if (b.d == 2) {
    double nk = std::hypot(k[0], k[1]);
    double s = (y[0] - p[0]) * (-k[1]) + (y[1] - p[1]) * k[0];
    return std::abs(s - std::round(s)) / nk;
  }
  const auto& e = b.e[i];
  double best = kInf;
  for (int m0 = -2; m0 <= 2; ++m0)
    for (int m1 = -2; m1 <= 2; ++m1)
      for (int m2 = -2; m2 <= 2; ++m2) {
        double w[3] = {y[0] - p[0] - m0, y[1] - p[1] - m1, y[2] - p[2] - m2};
        double t = w[0] * e[0] + w[1] * e[1] + w[2] * e[2];
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a) r2 += (w[a] - t * e[a]) * (w[a] - t * e[a]);
        best = std::min(best, r2);
      }
  return std::sqrt(best);
}

double line_separation(const Basis& b, int i, int j) {
  const auto &ei = b.e[i], &ej = b.e[j];
  if (b.d == 2) {
    double cr = ei[0] * ej[1] - ei[1] * ej[0];
    if (std::abs(cr) > 1e-12) return 0.0;
    return line_distance(b, i, b.p[j]);
  }
  double n[3] = {ei[1] * ej[2] - ei[2] * ej[1], ei[2] * ej[0] - ei[0] * ej[2], ei[0] * ej[1] - ei[1] * ej[0]};
  double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (nn < 1e-12) return line_distance(b, i, b.p[j]);
  double best = kInf;
  for (int m0 = -2; m0 <= 2; ++m0)
    for (int m1 = -2; m1 <= 2; ++m1)
      for (int m2 = -2; m2 <= 2; ++m2) {
        double w[3] = {b.p[j][0] + m0 - b.p[i][0], b.p[j][1] + m1 - b.p[i][1], b.p[j][2] + m2 - b.p[i][2]};
        best = std::min(best, std::abs(w[0] * n[0] + w[1] * n[1] + w[2] * n[2]) / nn);
      }
  return best;
}

bool separate_tubes(Basis& b, double mu, int attempts) {
  const int n = static_cast<int>(b.size());
  if (b.d == 2) return false;  // non-parallel periodic lines in the plane always cross
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u01;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int a = 0; a < attempts && !placed; ++a) {
      if (a > 0) b.p[i] = {u01(rng), u01(rng), u01(rng)};
      placed = true;
      for (int j = 0; j < i && placed; ++j) placed = line_separation(b, i, j) > 2.0 / mu;
    }
    if (!placed) return false;
  }
  return true;
}

void write_basis_csv(const Basis& b, const std::string& file) {
  std::ofstream os(file);
  os << "index";
  for (int a = 0; a < b.d; ++a) os << ",k" << a;
  for (int a = 0; a < b.d; ++a) os << ",p" << a;
  os << ",c_at_id";
  for (int r = 0; r < b.D; ++r) os << ",lin" << r;
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < b.size(); ++i) {
    os << i;
    for (int a = 0; a < b.d; ++a) os << "," << b.k[i][a];
    for (int a = 0; a < b.d; ++a) os << "," << b.p[i][a];
    os << "," << b.center_id[static_cast<int>(i)];
    for (int r = 0; r < b.D; ++r) os << "," << b.pinv(static_cast<int>(i), r);
    os << "\n";
  }
}

}  // namespace rns
