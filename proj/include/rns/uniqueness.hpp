#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rns/noise.hpp"
#include "rns/spectral.hpp"

namespace rns {

// Galerkin solution of du = (-P div(u (x) u) + nu lap u) dt + dW on the grid of u0.
struct GalerkinRun {
  NoiseSpectrum spec;
  double nu = 1.0, dt = 0.0;
  std::uint64_t seed = 0, sample = 0;
  int noise_refine = 1;  // noise is drawn on dt / noise_refine and aggregated exactly
  Path u;
  std::vector<double> energy;       // 1/2 ||u||^2 per frame
  std::vector<double> dissipation;  // nu int_0^t ||grad u||^2, trapezoidal
  std::vector<double> linf;         // grid max of |u| per frame
};

// Exponential Euler: the heat semigroup is applied exactly per mode, the
// nonlinearity is explicit and alias-free, the noise increment is the exact
// stochastic convolution over the step. Throws when dt ||u||_inf N > 0.5.
// Without keep_path only the final frame of u is stored; the per-frame series are complete.
GalerkinRun galerkin_solve(const Field& u0, const NoiseSpectrum& s, double dt, double T, std::uint64_t seed,
                           std::uint64_t sample = 0, double nu = 1.0, int noise_refine = 1, bool keep_path = true);

// Solution of the linear system driven by the frames of u. With substeps > 1 the
// coefficient is interpolated linearly in time; substeps must divide noise_refine.
// common_noise = false draws an independent stream.
Path linearized_solve(const GalerkinRun& u, const Field& chi0, int substeps = 1, bool common_noise = true);

struct LpsReport {
  double p = 2.0, q = 2.0;
  double norm = 0.0;         // ||u||_{L^p_t L^q_x}; frame max for p = inf
  double modulus = 0.0;      // max_n ||u_{n+1} - u_n||_{L^q}, the continuity surrogate
  double scale = 0.0;        // 2/p + d/q
  std::string regime;        // subcritical, critical, supercritical
  bool admissible = false;   // scale <= 1
};
LpsReport lps_monitor(const GalerkinRun& run, double p, double q);
LpsReport lps_classify(int d, double p, double q);

struct LedgerRow {
  double t = 0.0;
  std::string quantity;
  double value = 0.0, stderr_ = 0.0, bound = 0.0;
  bool flag = false;  // true when the bound is violated
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;  // quantity "energy": 1/2 E||u||^2 + nu int E||grad u||^2
  double trace = 0.0;           // Tr[G* G]
  double worst_margin = 0.0;    // max_t (lhs - bound) / (3 stderr + allowance)
  bool ok = true;
};

// Flags frames where the ensemble mean exceeds 1/2 E||u0||^2 + t/2 Tr[G* G] by more than
// 3 stderr + allowance * dt * bound (first-order scheme).
EnergyLedger energy_check(const std::vector<GalerkinRun>& runs, double allowance = 1.0);

struct GapLedger {
  std::vector<double> t, gap2, grad2, cross, rate, rate_bound, majorant;
  double identity = 0.0;  // max_n |1/2 D||Y||^2 + nu ||grad Y||^2 - cross| / (1 + terms)
  bool ok = true;
  std::vector<int> flagged;
};

// Difference of two runs driven by the same noise, on the frames of the coarser one.
// cross = int u1^i Y^j d_j Y^i; majorant = ||Y(0)||^2 exp(int ||u1||_inf^2 / (2 nu)) + allowance.
// The growth rate of ||Y||^2 is checked against ||u1||_inf^2 / (2 nu) only when Y(0) != 0.
GapLedger pathwise_gap(const GalerkinRun& a, const GalerkinRun& b, double allowance = 0.0);

// Independent members with samples 0..samples-1, run on a strided worker pool.
std::vector<GalerkinRun> galerkin_ensemble(const Field& u0, const NoiseSpectrum& s, double dt, double T,
                                           std::uint64_t seed, int samples, double nu = 1.0, int workers = 1,
                                           bool keep_paths = true);

Field taylor_green(const Grid& g, double amp);

void write_ledger_csv(const std::string& file, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> gap_rows(const GapLedger& g);

}  // namespace rns
