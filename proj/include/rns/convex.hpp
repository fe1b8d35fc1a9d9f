#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rns/geometry.hpp"
#include "rns/mikado.hpp"
#include "rns/noise.hpp"
#include "rns/profiles.hpp"
#include "rns/spectral.hpp"

namespace rns {

// chi(R) as a function of r = |R|_F: eps = 4^{-(q+1)} below eps, r above 2 eps,
// a smooth monotone blend in between.
double chi(double r, int q);

struct StepParams {
  int q = 0;
  int d = 2;
  double lambda = 0.0, theta = 0.0;
  double ell = 0.0, mu = 0.0, sigma = 0.0, kappa = 0.0, varsigma = 0.0;
  double nu = 1.0;
  bool full_schedule = true;  // false once any override is applied
  std::vector<std::string> violations;
};

struct Overrides {
  double ell = 0.0, mu = 0.0, sigma = 0.0, kappa = 0.0, varsigma = 0.0;  // 0 keeps the schedule value
};

// Parameters from lambda and theta; throws listing every failing inequality.
StepParams schedule_params(int q, double lambda, double theta, int d, double p, double r, double nu = 1.0,
                           const Overrides& ov = {});
std::vector<std::string> check_theta(double theta, int d, double p, double r);

// Discretization choices for one step.
struct StepGrid {
  int B_a = 0;        // band of the amplitudes, 0 picks (N/2-1)/4
  int B_W = 0;        // band of the Mikado family before oscillation, 0 picks (N/2-1)/(2 sigma)
  int family_N = 0;   // grid of the untruncated family, 0 picks max(8 mu, 64)
  std::string cache_dir;
  bool keep_components = false;
};

enum Component { kComL, kCom, kFar, kOscX, kOscT, kLin, kCor, kCut, kNumComponents };
const char* component_name(int c);

struct IterationState {
  int q = 0;
  double nu = 1.0;
  Path v, R;
  std::vector<StepParams> history;
  bool full_schedule = true;
};

struct ResidualReport {
  double max_abs = 0.0;     // max over interior frames of ||r||_{L^2}
  double scale = 0.0;       // max_n ||v|| + max_n ||R||
  double relative = 0.0;    // max_abs / (1 + scale)
  double balance = 0.0;     // max over interior frames of the summed term norms (diagnostic)
  double edge = 0.0;        // ||r|| at frame 0 with the constant extension (diagnostic)
  int worst_frame = -1;
  std::vector<double> per_frame;
  bool pass(double tol) const { return relative <= tol; }
};

// r = D v + P div((v+z) o (v+z)) - nu lap v - z - P div R with centered D.
ResidualReport residual_certificate(const Path& v, const Path& R, const Path& z, double nu);
Field frame_residual(const Path& v, const Path& R, const Path& z, double nu, long n, double* scale = nullptr);

// Initial iterate from a divergence-free w with w(0) = 0. dw holds the time
// derivative of w at each frame; when empty a fourth-order stencil is used.
IterationState initial_state(const Path& w, const Path& z, double nu, const Path& dw = Path());

struct StepDiagnostics {
  std::array<double, kNumComponents> l1l1{};  // int ||component||_{L^1} dt over the path
  std::array<double, 4> pert_l2l2{};          // omega_p, omega_c, omega_t, omega (with cutoffs)
  double geo_identity = 0.0;   // max_n ||sum a_k^2 M_k - ghat^2 (rho Id - R_ell)|| / ||ghat^2 (rho Id - R_ell)||
  double div_pc = 0.0;         // max_n ||div(w_p + w_c)|| / ||grad(w_p + w_c)||
  double ball = 0.0;           // max |R_ell| / rho, at most 1/2
  ResidualReport certificate;
  int B_a = 0, B_W = 0;
};

struct StepResult {
  IterationState next;
  StepDiagnostics diag;
  std::array<Path, kNumComponents> components;  // filled when keep_components
  Path omega_p, omega_c, omega_t;               // cutoff versions, filled when keep_components
};

// One convex integration step. Output frames are one fewer than the input.
StepResult step(const IterationState& s, const StepParams& p, const Path& z, const StepGrid& grid = {});

// Amplitude pieces at a single frame, exposed for tests.
struct Amplitudes {
  Field rho;                 // 4 chi(R_ell)
  std::vector<Field> b;      // Trunc_{B_a} sqrt(rho Gamma_k^2(Id - R_ell / rho))
  double ball = 0.0;
};
Amplitudes amplitudes(const Basis& basis, const Field& R_ell, int q, int B_a);

// Mikado family oscillated onto the step grid, scaled to unit mean square.
struct OscillatedFamily {
  std::vector<Field> W, V, WW, M;  // M_k = mean of W_k (x) W_k, stored as a constant field
  int B_W = 0;
};
OscillatedFamily oscillate_family(const MikadoFamily& f, int sigma, int N, int B_W);

// Parameters for the desk-scale campaign.
struct CampaignConfig {
  int d = 2, N = 64;
  double dt = 1.0 / 256, T = 0.5;
  double nu = 1.0;
  int steps = 1, samples = 1;
  std::uint64_t seed = 1;
  NoiseSpectrum noise;
  double w_amp = 0.05;
  StepParams params;  // desk overrides; q is advanced per step
  StepGrid grid;
  int workers = 1;
};

// Default smooth initial field sin^4(pi t / 2) amp (sin y, sin x) (2D) used by the desk runs.
Path default_w(const Grid& g, double dt, int frames, double amp, Path* dw = nullptr);

struct CampaignRow {
  int q = 0;
  std::string component;
  std::string norm;
  double estimate = 0.0, stderr_ = 0.0;
};
struct CampaignReport {
  std::vector<CampaignRow> rows;
  std::vector<double> residuals;  // worst relative certificate per step over samples
};
CampaignReport run_campaign(const CampaignConfig& c);
void write_campaign_csv(const std::string& file, const CampaignReport& r);

}  // namespace rns
