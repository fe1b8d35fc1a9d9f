#pragma once

#include <string>
#include <vector>

namespace rns {

// L2-normalized bump exp(-1/(t(1-t))) on (0,1) and G(x) = int_0^x g^2.
double base_g(double t);
double base_G(double x);

// g_kappa(varsigma t) with its periodic extension, and the primitive defect
// h_kappa(varsigma t) = G(min(kappa frac, 1)) - frac, frac = frac(varsigma t).
struct TemporalProfile {
  double kappa = 1.0;
  int varsigma = 1;

  double g(double t) const;
  double h(double t) const;
  double H(double t) const { return h(t) / varsigma; }
  // 1 + (H(t+dt) - H(t-dt)) / (2 dt): the average of g^2 over [t-dt, t+dt], never negative.
  double ghat_sq(double t, double dt) const;
};

struct SampledProfile {
  TemporalProfile p;
  double dt = 0.0;
  std::vector<double> t, g, h;
};

// Throws unless every pulse spans at least 16 time steps.
SampledProfile build_g(double kappa, int varsigma, double dt, double T = 1.0);

// Exp smoothstep on [0,1] and its first two derivatives.
double smoothstep(double x, int order = 0);

// Theta = 0 for t <= sqrt(ell)/2 and 1 for t >= sqrt(ell).
struct TimeCutoff {
  double ell = 0.0;
  double operator()(double t) const { return value(t, 0); }
  double value(double t, int order) const;
  double C1 = 0.0, C2 = 0.0;  // max |Theta^(n)| ell^{n/2}
};

// Throws if the ramp spans fewer than 4 steps.
TimeCutoff build_cutoff(double ell, double dt);

// Columns t, g, h, theta.
void write_profiles_csv(const std::string& file, const SampledProfile& s, const TimeCutoff& c);

}  // namespace rns
