#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rns/spectral.hpp"

namespace rns {

// Direction set with coefficient maps c_k = Gamma_k^2 satisfying
// sum_k c_k(R) e_k (x) e_k = R on the ball B_{1/2}(Id).
struct Basis {
  int d = 2;
  int D = 3;  // dimension of symmetric d x d matrices
  std::vector<Wave> k;
  std::vector<std::array<double, 3>> e;
  std::vector<std::array<double, 3>> p;  // base points, unit-period coordinates

  // E maps coefficients to the isometric coordinates of a symmetric matrix.
  Eigen::MatrixXd E;
  Eigen::MatrixXd pinv;
  Eigen::MatrixXd null;  // empty when the selection is affine
  Eigen::VectorXd center_id;

  std::size_t size() const { return k.size(); }
  bool affine() const { return null.cols() == 0; }
};

// Isometric coordinates: diagonal entries, then sqrt(2) times the upper entries.
void sym_to_vec(int d, const double* M, double* v);

Basis make_basis(int d);
Basis make_basis(int d, const std::vector<Wave>& dirs);

// Coefficients c_k(R) for a symmetric R given row-major; throws if R is outside
// the region where the selection stays positive.
void gamma_sq(const Basis& b, const double* R, double* c);

struct PositivityReport {
  double analytic_min = 0.0;  // exact minimum on the ball (affine selections only)
  double sampled_min = 0.0;
  int samples = 0;
  bool ok = false;
};

PositivityReport certify_positivity(const Basis& b, int samples, std::uint64_t seed);

// Largest Frobenius error of the decomposition over random R in the ball.
double decomposition_error(const Basis& b, int samples, std::uint64_t seed);

// Rechoose base points so that tubes of radius 1/mu around distinct lines are
// disjoint. Returns false if no admissible choice was found.
bool separate_tubes(Basis& b, double mu, int attempts = 2000);
double line_distance(const Basis& b, int i, const std::array<double, 3>& y);
double line_separation(const Basis& b, int i, int j);

void write_basis_csv(const Basis& b, const std::string& file);

}  // namespace rns
