#pragma once

#include <string>
#include <vector>

#include "rns/geometry.hpp"
#include "rns/spectral.hpp"

namespace rns {

// Radial profile supported in (1/2, 1) and the induced Laplacian profile
// Psi = Phi'' + (d-2) Phi' / r.
double mikado_phi(double r);
double mikado_psi(int d, double r);

struct MikadoFamily {
  Basis basis;
  double mu = 0.0;
  Grid g;
  std::vector<Field> Phi;  // scalar potentials, Laplacian equals Psi
  std::vector<Field> W;    // Psi_k e_k
  std::vector<Field> V;    // e_k (x) grad Phi_k - grad Phi_k (x) e_k
  std::vector<double> c_analytic;  // normalization from the radial integral
  // Grid norm of Psi_k over its continuum norm; below 1 when the tube is under-resolved.
  std::vector<double> capture;

  std::size_t size() const { return W.size(); }
};

// Exact Fourier coefficients of the tubes on modes orthogonal to k,
// renormalizes so that the integral of W_k (x) W_k is e_k (x) e_k.
MikadoFamily build_mikado(const Basis& b, double mu, int N, const std::string& cache_dir = "");

// Keeps modes with |m_a| <= B and restores the normalization.
MikadoFamily truncate_family(const MikadoFamily& fam, int B);

// Error reports for the structural identities.
struct MikadoReport {
  double div_W = 0.0;      // max_k ||div W_k|| / ||grad W_k||
  double div_WW = 0.0;     // max_k ||div(W_k (x) W_k)|| / ||grad (W_k (x) W_k)||
  double div_V_minus_W = 0.0;  // max_k ||div V_k - W_k|| / ||W_k||
  double gram = 0.0;       // max_k |int W_k (x) W_k - e_k (x) e_k|
  double psi_norm = 0.0;   // max_k | ||Psi_k||_{L^2} - 1 |
  double skew_V = 0.0;     // max_k ||V_k + V_k^T||
  double resolution = 0.0; // max_k |capture_k - 1|
  double mean_W = 0.0;
};
MikadoReport check_mikado(const MikadoFamily& fam);

}  // namespace rns
