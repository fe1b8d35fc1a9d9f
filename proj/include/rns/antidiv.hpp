#pragma once

#include "rns/spectral.hpp"

namespace rns {

// Symmetric trace-free anti-divergence: div(R v) = v - mean(v). Mode zero of
// the output is zero.
Field apply_R(const Field& v);

// Contracts R column by column: R(M)_l := R(M e_l) for a tensor M.
// Bilinear anti-divergence, div B(v, M) = M v - mean(M v) for mean-zero M.
// Throws if M has a nonzero mean.
Field apply_B(const Field& v, const Field& M);

struct AntiDivReport {
  double div_R = 0.0;     // ||div Rv - (v - mean v)|| / ||v||
  double trace_R = 0.0;   // max |tr Rv| on the grid
  double sym_R = 0.0;
  double R_lap = 0.0;     // same for P v, where R lap = grad + grad^T holds
  double div_B = 0.0;     // ||div B - (Mv - mean)|| / ||Mv||
  double B_ratio = 0.0;   // ||B||_2 / (||v||_{C^1} ||M||_2)
};
AntiDivReport check_antidiv(const Field& v, const Field& M);

}  // namespace rns
