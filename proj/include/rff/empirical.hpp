#pragma once

#include <cstdint>
#include <vector>

#include "rff/data.hpp"
#include "rff/linalg.hpp"

namespace rff {

// One draw of the random feature map: W has i.i.d. standard normal entries
// and is shared between train and test features. sigma_* stacks the cosine
// block on top of the sine block.
struct FeatureMap {
  Matrix w;            // N x p
  Matrix sigma_train;  // 2N x n
  Matrix sigma_test;   // 2N x n_hat (empty when sampled train-only)

  int feature_count() const { return static_cast<int>(w.rows()); }
};

struct MsePair {
  double train = 0.0;
  double test = 0.0;
};

struct MonteCarloResult {
  double mean_train = 0.0;
  double mean_test = 0.0;
  double std_train = 0.0;
  double std_test = 0.0;
  int trials = 0;
};

FeatureMap sample_features(const DataMatrix& x, const DataMatrix& x_hat, int feature_count,
                           std::uint64_t seed);
FeatureMap sample_features(const DataMatrix& x, int feature_count, std::uint64_t seed);

// Ridge regressor over the 2N-dimensional features; solves the n x n dual
// system when 2N >= n and the 2N x 2N primal system otherwise (both agree
// for lambda > 0).
Vector ridge_regressor(const FeatureMap& fm, const Vector& y, double lambda);

MsePair empirical_mse(const FeatureMap& fm, const Vector& beta, const Vector& y,
                      const Vector& y_hat);

// Resolvent of the empirical Gram matrix, ((1/n) S^T S + lambda I)^-1.
Matrix resolvent(const FeatureMap& fm, double lambda);

// Repeated simulation with per-trial seeds derived from the master seed by a
// counter construction; results do not depend on thread count.
MonteCarloResult monte_carlo(const DataMatrix& train, const DataMatrix& test, int feature_count,
                             double lambda, int trials, std::uint64_t seed, int threads = 1);

// Same trials evaluated across a whole lambda grid; every lambda in a trial
// shares that trial's W draw, and entry j summarizes lambdas[j]. Sweeps use
// this so the Gram matrix is built once per trial instead of once per cell.
std::vector<MonteCarloResult> monte_carlo_curve(const DataMatrix& train, const DataMatrix& test,
                                                int feature_count,
                                                const std::vector<double>& lambdas, int trials,
                                                std::uint64_t seed, int threads = 1);

}  // namespace rff
