#pragma once

#include <cstdint>
#include <vector>

#include "rff/linalg.hpp"

namespace rff {

// Continuous part of the Marcenko-Pastur density at x > 0, for aspect ratio
// c = lim p/n. The point mass at zero (weight 1 - 1/c when c > 1) is
// reported separately by mp_atom_weight.
double mp_density(double x, double c);
double mp_atom_weight(double c);

// Support edges (1 -/+ sqrt(c))^2 of the continuous part.
double mp_edge_lower(double c);
double mp_edge_upper(double c);

// Unique positive root of c*lambda*m^2 + (1 + lambda - c)*m - 1 = 0,
// evaluated on the cancellation-free branch.
double mp_stieltjes(double lambda, double c);

struct QuadformResult {
  double empirical = 0.0;   // mean over trials of a^T (C_hat + lambda I)^-1 a
  double rmt = 0.0;         // m(lambda)
  double population = 0.0;  // a^T (C + lambda I)^-1 a = 1/(1+lambda) for C = I
};

// Sample-covariance resolvent quadratic form for C = I_p, X Gaussian.
QuadformResult sample_cov_quadform(const Vector& a, int n, double lambda, int trials,
                                   std::uint64_t seed, int threads = 1);

// Mean over trials of the operator norm ||C_hat - I||.
double sample_cov_norm_gap(int n, int p, int trials, std::uint64_t seed, int threads = 1);

struct EigHistogram {
  std::vector<double> centers;
  std::vector<double> density;  // normalized so that sum(density)*bin_width = 1
  std::vector<double> overlay;  // mp_density at the bin centers
  double bin_width = 0.0;
  double atom_weight = 0.0;
};

// Eigenvalue histogram of one sample-covariance draw with the limiting
// density sampled at the bin centers.
EigHistogram eig_histogram(int n, int p, int bins, std::uint64_t seed);

}  // namespace rff
