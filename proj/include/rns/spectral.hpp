#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rns {

using cplx = std::complex<double>;
using Wave = std::array<int, 3>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Periodic grid on [0, 2pi)^d. Coefficients use the real-to-complex layout:
// axes 0..d-2 carry all N modes, the last axis carries k = 0..N/2.
struct Grid {
  int d = 2;
  int N = 64;

  std::size_t nspec() const;
  std::size_t nphys() const;
  double volume() const;
  bool operator==(const Grid& o) const { return d == o.d && N == o.N; }
};

struct ModeTable {
  std::vector<Wave> k;
  std::vector<double> k2;
  std::vector<double> weight;  // Parseval multiplicity of a stored coefficient
  std::vector<char> active;    // zero on Nyquist planes
};

const ModeTable& modes(const Grid& g);

int ncomp(int d, int rank);

struct Field {
  Grid g;
  int rank = 0;
  std::vector<cplx> c;

  Field() = default;
  Field(Grid grid, int r);

  int ncomp() const { return rns::ncomp(g.d, rank); }
  cplx* comp(int i) { return c.data() + i * g.nspec(); }
  const cplx* comp(int i) const { return c.data() + i * g.nspec(); }

  // Any k with components in [-N/2, N/2).
  cplx coeff(const Wave& k, int comp = 0) const;
  void set_coeff(const Wave& k, int comp, cplx v);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  void axpy(double a, const Field& o);
  void zero();
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field b);

// Physical samples on an M^d grid, one array per component.
struct Phys {
  int d = 2;
  int M = 0;
  int rank = 0;
  std::vector<std::vector<double>> v;

  Phys() = default;
  Phys(int dim, int m, int r);
  std::size_t size() const;
  int ncomp() const { return rns::ncomp(d, rank); }
};

std::size_t spec_index(const Grid& g, const Wave& k);

void fft_forward(int d, int M, const double* in, cplx* out);
void fft_backward(int d, int M, const cplx* in, double* out);

Phys to_phys(const Field& f, int M = 0);
Field from_phys(const Phys& p, int N);
int padded_size(int N);

// Per-mode real multiplier applied to every component.
Field apply_multiplier(const Field& f, const std::function<double(const Wave&, double)>& m);
void zero_nyquist(Field& f);
Field truncate_box(const Field& f, int K);
int band(const Field& f, double tol = 0.0);

Field grad(const Field& f);
Field div(const Field& f);
Field lap(const Field& f);
Field inv_lap(const Field& f);
Field leray(const Field& f);
Field partial(const Field& f, int axis);

Field component(const Field& f, int i);
void set_component(Field& f, int i, const Field& s);
Field trace_free(const Field& T);
Field transpose(const Field& T);
Field symmetrize(const Field& T);
cplx mean(const Field& f, int comp = 0);

// Dealiased products truncated to the N grid.
Field outer(const Field& u, const Field& v);
Field tf_outer(const Field& u, const Field& v);
Field scalar_times(const Field& a, const Field& f);

double l2(const Field& f);
double inner(const Field& a, const Field& b);
double lq(const Field& f, double q, int refine = 0);
double wsr(const Field& f, double s, double r);
double cn(const Field& f, int order);
double lq_phys(const Phys& p, double q);

// f(sigma x) on an Nout grid using modes of f with |m_a| <= B.
Field rescale(const Field& f, int sigma, int Nout, int B);

// | ||a f(sigma .)||_p - |T|^{-1/p} ||a||_p ||f||_p | and sigma^{-1/p} ||a||_{C^1} ||f||_p |T|^{-1/p}.
struct HolderGap {
  double gap = 0.0;
  double bound = 0.0;
};
HolderGap improved_holder_gap(const Field& a, const Field& f, int sigma, double p);

// Normalized radial bump on the unit ball and its Fourier transform.
double bump_hat(int d, double xi);
std::vector<double> space_mollifier(const Grid& g, double ell);
std::vector<double> time_mollifier(double ell, double dt);

struct Path {
  double dt = 0.0;
  std::vector<Field> f;

  std::size_t size() const { return f.size(); }
  double t(std::size_t n) const { return dt * static_cast<double>(n); }
  const Field& at(long n) const;  // clamps to the extension for n < 0
};

// Centered difference D and average A on a path with constant extension at t < 0.
Field diff_t(const Path& p, long n);

double window_norm(const std::vector<double>& v, double dt, double s, double p);

void write_field(const std::string& file, const Field& f, double t);
Field read_field(const std::string& file, double* t = nullptr);

}  // namespace rns
