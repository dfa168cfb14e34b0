#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rff/data.hpp"
#include "rff/kernels.hpp"
#include "rff/linalg.hpp"

namespace rff {

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  // Warm start for grid sweeps; the default (0, 0) approaches the unique
  // positive solution from below.
  double init_cos = 0.0;
  double init_sin = 0.0;
};

// Solution of the deterministic-equivalent pair (delta_cos, delta_sin) with
// its resolvent q_bar = ((N/n)(K_cos/(1+dc) + K_sin/(1+ds)) + lambda I)^-1.
struct FixedPointSolution {
  double delta_cos = 0.0;
  double delta_sin = 0.0;
  Matrix q_bar;
  int iterations = 0;
  double residual = 0.0;
  double lambda = 0.0;
  int feature_count = 0;  // N

  int n() const { return static_cast<int>(q_bar.rows()); }
};

enum class Regime { under, over };  // 2N < n vs 2N > n

// Ridgeless-limit scaled variables: gamma = lambda * delta (under) or
// gamma = delta (over). scaled_resolvent stores the limit of lambda*q_bar
// (under) or of q_bar itself (over).
struct GammaSolution {
  double gamma_cos = 0.0;
  double gamma_sin = 0.0;
  Regime regime = Regime::under;
  Matrix scaled_resolvent;
  int iterations = 0;
  double residual = 0.0;
};

struct OmegaResult {
  Eigen::Matrix2d omega;
  double det_omega_inv = 0.0;
};

struct ThetaPair {
  double theta_cos = 0.0;
  double theta_sin = 0.0;
};

struct MonotonicityReport {
  std::vector<double> lambda_grid;
  std::vector<double> delta_cos_vs_lambda, delta_sin_vs_lambda;
  std::vector<int> feature_grid;
  std::vector<double> delta_cos_vs_features, delta_sin_vs_features;
  std::vector<std::string> violations;

  bool clean() const { return violations.empty(); }
};

// Damped fixed-point iteration with a Newton acceleration stage; converges
// to the unique positive solution for any lambda > 0. Throws
// ConvergenceError when max_iter is exhausted.
FixedPointSolution solve_delta(const KernelPair& k, int feature_count, double lambda,
                               const SolveOptions& opts = {});

// Ridgeless phase equations. Refuses the singular boundary 2N == n.
GammaSolution solve_gamma(const KernelPair& k, int feature_count, const SolveOptions& opts = {});

// The 2x2 second-order correction matrix and det(Omega^-1), evaluated
// through a cancellation-free determinant so the lambda -> 0 scaling at the
// interpolation threshold survives in floating point.
OmegaResult omega(const KernelPair& k, const FixedPointSolution& fp, int feature_count);

// Asymptotic training MSE (first-order term plus Omega-weighted correction).
double train_mse_theory(const KernelPair& k, const Vector& y, const FixedPointSolution& fp,
                        int feature_count, double lambda);

// Test-vs-train interaction scalars Theta_cos, Theta_sin.
ThetaPair theta_sigma(const KernelPair& k_train, const KernelPair& k_cross,
                      const KernelPair& k_test, const FixedPointSolution& fp, int feature_count);

// Asymptotic test MSE.
double test_mse_theory(const KernelPair& k_train, const KernelPair& k_cross,
                       const KernelPair& k_test, const Vector& y, const Vector& y_hat,
                       const FixedPointSolution& fp, int feature_count);

// Deterministic equivalent of E[Q A Q] for symmetric nonnegative A.
Matrix eqaq_equivalent(const KernelPair& k, const Matrix& a, const FixedPointSolution& fp,
                       int feature_count);

// Operator norm of (Monte-Carlo mean of the empirical resolvent) - q_bar.
double resolvent_gap(const DataMatrix& x, int feature_count, double lambda, int trials,
                     std::uint64_t seed, int threads = 1);

// Finite-difference monotonicity check of delta along a lambda grid (at
// feature_count) and a feature grid (at lambda). Violations are reported,
// not thrown.
MonotonicityReport delta_derivative_signs(const KernelPair& k, int feature_count, double lambda,
                                          const std::vector<double>& lambda_grid,
                                          const std::vector<int>& feature_grid);

// Large-N (Gaussian kernel) limits, used as the classical baseline the
// finite-N theory is compared against.
double gaussian_limit_train_mse(const Matrix& k, const Vector& y, int feature_count, double lambda);
double gaussian_limit_test_mse(const Matrix& k_train, const Matrix& k_cross, const Vector& y,
                               const Vector& y_hat);

}  // namespace rff
