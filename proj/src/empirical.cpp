#include "rff/empirical.hpp"

#include <cmath>

#include "rff/errors.hpp"
#include "rff/rng.hpp"

namespace rff {

namespace {

Matrix feature_blocks(const Matrix& wx) {
  Matrix sigma(2 * wx.rows(), wx.cols());
  sigma.topRows(wx.rows()) = wx.array().cos().matrix();
  sigma.bottomRows(wx.rows()) = wx.array().sin().matrix();
  return sigma;
}

}  // namespace

FeatureMap sample_features(const DataMatrix& x, const DataMatrix& x_hat, int feature_count,
                           std::uint64_t seed) {
  if (x.p() != x_hat.p()) throw ShapeError("sample_features: dimension mismatch");
  FeatureMap fm = sample_features(x, feature_count, seed);
  fm.sigma_test = feature_blocks(fm.w * x_hat.x);
  return fm;
}

FeatureMap sample_features(const DataMatrix& x, int feature_count, std::uint64_t seed) {
  if (feature_count < 1) throw NumericalError("sample_features: feature count must be >= 1");
  FeatureMap fm;
  fm.w.resize(feature_count, x.p());
  auto rng = make_rng(seed);
  fill_gaussian(fm.w, rng);
  fm.sigma_train = feature_blocks(fm.w * x.x);
  return fm;
}

Vector ridge_regressor(const FeatureMap& fm, const Vector& y, double lambda) {
  if (lambda <= 0.0) throw NumericalError("ridge_regressor: lambda must be positive");
  const Matrix& s = fm.sigma_train;
  if (y.size() != s.cols()) throw ShapeError("ridge_regressor: target size mismatch");
  const double n = static_cast<double>(s.cols());

  if (s.rows() >= s.cols()) {
    // dual: beta = (1/n) S (S^T S / n + lambda I)^-1 y
    Matrix gram = s.transpose() * s / n;
    gram.diagonal().array() += lambda;
    return s * spd_solve(gram, y, "ridge_regressor") / n;
  }
  // primal: beta = (S S^T / n + lambda I)^-1 S y / n
  Matrix gram = s * s.transpose() / n;
  gram.diagonal().array() += lambda;
  return spd_solve(gram, s * y / n, "ridge_regressor");
}

MsePair empirical_mse(const FeatureMap& fm, const Vector& beta, const Vector& y,
                      const Vector& y_hat) {
  if (beta.size() != fm.sigma_train.rows()) throw ShapeError("empirical_mse: beta size mismatch");
  if (y.size() != fm.sigma_train.cols() || y_hat.size() != fm.sigma_test.cols())
    throw ShapeError("empirical_mse: target size mismatch");
  MsePair out;
  out.train = (y - fm.sigma_train.transpose() * beta).squaredNorm() / y.size();
  out.test = (y_hat - fm.sigma_test.transpose() * beta).squaredNorm() / y_hat.size();
  return out;
}

Matrix resolvent(const FeatureMap& fm, double lambda) {
  if (lambda <= 0.0) throw NumericalError("resolvent: lambda must be positive");
  const Matrix& s = fm.sigma_train;
  Matrix gram = s.transpose() * s / static_cast<double>(s.cols());
  gram.diagonal().array() += lambda;
  Matrix q = spd_inverse(gram, "resolvent");
  return 0.5 * (q + q.transpose());
}

MonteCarloResult monte_carlo(const DataMatrix& train, const DataMatrix& test, int feature_count,
                             double lambda, int trials, std::uint64_t seed, int threads) {
  return monte_carlo_curve(train, test, feature_count, {lambda}, trials, seed, threads).front();
}

std::vector<MonteCarloResult> monte_carlo_curve(const DataMatrix& train, const DataMatrix& test,
                                                int feature_count,
                                                const std::vector<double>& lambdas, int trials,
                                                std::uint64_t seed, int threads) {
  if (trials < 1) throw NumericalError("monte_carlo: trials must be >= 1");
  if (lambdas.empty()) throw NumericalError("monte_carlo: empty lambda grid");
  for (double lam : lambdas)
    if (lam <= 0.0) throw NumericalError("monte_carlo: lambda must be positive");
  const int n = train.n(), n_hat = test.n();
  const std::size_t n_lambda = lambdas.size();

  // per_trial[t] holds (train, test) MSEs for every lambda of trial t
  std::vector<std::vector<MsePair>> per_trial(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    FeatureMap fm = sample_features(train, test, feature_count, derive_seed(seed, t));
    Matrix gram = fm.sigma_train.transpose() * fm.sigma_train / static_cast<double>(n);
    Matrix cross = fm.sigma_test.transpose() * fm.sigma_train / static_cast<double>(n);
    std::vector<MsePair>& row = per_trial[t];
    row.resize(n_lambda);
    for (std::size_t j = 0; j < n_lambda; ++j) {
      Matrix shifted = gram;
      shifted.diagonal().array() += lambdas[j];
      Vector z = spd_solve(shifted, train.y, "monte_carlo");
      row[j].train = (train.y - gram * z).squaredNorm() / n;
      row[j].test = (test.y - cross * z).squaredNorm() / n_hat;
    }
  });

  std::vector<MonteCarloResult> out(n_lambda);
  for (std::size_t j = 0; j < n_lambda; ++j) {
    double sum_train = 0.0, sum_test = 0.0;
    for (int t = 0; t < trials; ++t) {
      sum_train += per_trial[t][j].train;
      sum_test += per_trial[t][j].test;
    }
    MonteCarloResult& r = out[j];
    r.trials = trials;
    r.mean_train = sum_train / trials;
    r.mean_test = sum_test / trials;
    if (trials > 1) {
      double ss_train = 0.0, ss_test = 0.0;
      for (int t = 0; t < trials; ++t) {
        ss_train += (per_trial[t][j].train - r.mean_train) * (per_trial[t][j].train - r.mean_train);
        ss_test += (per_trial[t][j].test - r.mean_test) * (per_trial[t][j].test - r.mean_test);
      }
      r.std_train = std::sqrt(ss_train / (trials - 1));
      r.std_test = std::sqrt(ss_test / (trials - 1));
    }
  }
  return out;
}

}  // namespace rff
