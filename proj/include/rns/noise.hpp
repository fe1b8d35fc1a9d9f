#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rns/spectral.hpp"

namespace rns {

// Diagonal G in the real divergence-free Fourier basis: per wavevector pair
// +-k with 0 < |k|_inf <= K and per polarization p perp k, the functions
// sqrt(2/|T|) p cos(k.x) and sqrt(2/|T|) p sin(k.x), each with standard
// deviation g_k = amp (1+|k|^2)^{-beta/2}.
struct NoiseSpectrum {
  int d = 2;
  int K = 8;
  double beta = 1.6;
  double amp = 1.0;

  double g(double k2) const;
  double trace() const;                  // sum g^2 at truncation
  double trace_weighted(double lambda) const;  // sum g^2 (1+|k|^2)^lambda
  double tail_bound() const;             // integral estimate of the truncated tail, inf if divergent
};

// Default decay exponent: trace-class with Tr[G*(I-Delta)^lambda G] < inf at lambda = d/2 - 1 + 0.1.
double default_beta(int d);

// One entry per (k, polarization); coordinates are stored as (cos, sin) pairs.
struct NoiseModes {
  int d = 2;
  std::vector<Wave> k;
  std::vector<std::array<double, 3>> pol;
  std::vector<double> k2, g;
  std::size_t size() const { return k.size(); }
};
NoiseModes noise_modes(const NoiseSpectrum& s);

// Field with modal coordinates x (2 per mode) on grid g.
Field modal_field(const NoiseModes& m, const std::vector<double>& x, const Grid& g);

// Independent stream for one (sample, frame) pair, so that redrawing the
// increments of later frames never touches earlier ones.
std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t sample, std::uint64_t frame);

// Exact OU transition x' = a x + b g xi for rate lambda: a = e^{-lambda dt},
// b^2 = (1 - a^2) / (2 lambda).
struct OUStep {
  double a = 1.0, b = 0.0;
};
OUStep ou_step(double lambda, double dt);

// Modal W_con path (zero start) with rates nu |k|^2 + 1; frames 0..steps.
std::vector<std::vector<double>> sample_modal_path(const NoiseModes& m, int nu, double dt, int steps,
                                                   std::uint64_t seed, std::uint64_t sample);

// z(t) = e^{t(nu Delta - I)} u0 + W_con(t) on the grid of u0.
Path sample_z_path(const Field& u0, const NoiseSpectrum& s, double T, double dt, std::uint64_t seed, int nu,
                   std::uint64_t sample = 0);

struct MomentRow {
  double s = 0.0;
  double m = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct MomentTable {
  std::vector<MomentRow> rows;
  double flatness = 0.0;  // max / min estimate across windows
};

// E ||W_con||^m_{C^{1/2-delta}_{[s,s+1]} L^2} for s = 0..S, over all frame pairs in each window.
MomentTable estimate_convolution_moments(const NoiseSpectrum& s, double delta, double m, int S, int samples,
                                         double dt, std::uint64_t seed, int nu = 1, int workers = 1);

// (E int_s^{s+1} ||z - z_ell||^2)^{1/2} for each ell with common random numbers.
struct MollifierRow {
  double ell = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};
std::vector<MollifierRow> mollification_error(const NoiseSpectrum& s, const std::vector<double>& ells, double window_s,
                                              int samples, double dt, std::uint64_t seed, int workers = 1);

struct HeatDecayReport {
  double sup = 0.0;  // sup over t in [dt,1] of ||e^{t(Delta-I)} u0||_inf e^{t/2} t^{d/(2 p1)} / ||u0||_{p1}
  std::vector<double> t, value;
};
HeatDecayReport heat_decay_check(const Field& u0, double p1, double dt);

void write_moments_csv(const std::string& file, const MomentTable& t);

}  // namespace rns
