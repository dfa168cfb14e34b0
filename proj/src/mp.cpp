#include "rff/mp.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "rff/errors.hpp"
#include "rff/rng.hpp"

namespace rff {

namespace {

// Accumulates C_hat = X X^T / n in column blocks so the full p x n Gaussian
// matrix never has to be materialized (n can be 100 p).
Matrix sample_covariance(int n, int p, std::mt19937_64& rng) {
  Matrix c_hat = Matrix::Zero(p, p);
  constexpr int kBlock = 4096;
  Matrix block(p, kBlock);
  for (int done = 0; done < n; done += kBlock) {
    const int cols = std::min(kBlock, n - done);
    fill_gaussian(block.leftCols(cols), rng);
    c_hat.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(cols), 1.0 / n);
  }
  return c_hat.selfadjointView<Eigen::Lower>();
}

}  // namespace

double mp_density(double x, double c) {
  if (x <= 0.0) throw DataError("mp_density: x must be positive");
  if (c <= 0.0) throw DataError("mp_density: c must be positive");
  const double lower = mp_edge_lower(c), upper = mp_edge_upper(c);
  const double a = std::max(x - lower, 0.0);
  const double b = std::max(upper - x, 0.0);
  return std::sqrt(a * b) / (2.0 * std::numbers::pi * c * x);
}

double mp_atom_weight(double c) {
  if (c <= 0.0) throw DataError("mp_atom_weight: c must be positive");
  return c > 1.0 ? 1.0 - 1.0 / c : 0.0;
}

double mp_edge_lower(double c) {
  const double s = 1.0 - std::sqrt(c);
  return s * s;
}

double mp_edge_upper(double c) {
  const double s = 1.0 + std::sqrt(c);
  return s * s;
}

double mp_stieltjes(double lambda, double c) {
  if (lambda <= 0.0) throw DataError("mp_stieltjes: lambda must be positive");
  if (c <= 0.0) throw DataError("mp_stieltjes: c must be positive");
  const double b = 1.0 + lambda - c;
  const double disc = std::sqrt(b * b + 4.0 * c * lambda);
  // positive root of c*lambda*m^2 + b*m - 1; the 2/(b + disc) branch avoids
  // cancellation for b >= 0 and degrades gracefully to 1/(1+lambda) as c -> 0
  if (b >= 0.0) return 2.0 / (b + disc);
  return (disc - b) / (2.0 * c * lambda);
}

QuadformResult sample_cov_quadform(const Vector& a, int n, double lambda, int trials,
                                   std::uint64_t seed, int threads) {
  const int p = static_cast<int>(a.size());
  if (std::abs(a.norm() - 1.0) > 1e-8) throw DataError("sample_cov_quadform: a must be a unit vector");
  if (n < 1 || trials < 1) throw DataError("sample_cov_quadform: n and trials must be >= 1");

  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    auto rng = make_rng(derive_seed(seed, t));
    Matrix shifted = sample_covariance(n, p, rng);
    shifted.diagonal().array() += lambda;
    Vector solved = spd_solve(shifted, a, "sample_cov_quadform");
    values[t] = a.dot(solved);
  });
  double sum = 0.0;
  for (double v : values) sum += v;

  QuadformResult out;
  out.empirical = sum / trials;
  out.rmt = mp_stieltjes(lambda, static_cast<double>(p) / n);
  out.population = 1.0 / (1.0 + lambda);
  return out;
}

double sample_cov_norm_gap(int n, int p, int trials, std::uint64_t seed, int threads) {
  if (n < 1 || p < 1 || trials < 1) throw DataError("sample_cov_norm_gap: bad sizes");
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    auto rng = make_rng(derive_seed(seed, t));
    Matrix c_hat = sample_covariance(n, p, rng);
    c_hat.diagonal().array() -= 1.0;
    values[t] = operator_norm_sym(c_hat);
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / trials;
}

EigHistogram eig_histogram(int n, int p, int bins, std::uint64_t seed) {
  if (bins < 10) throw DataError("eig_histogram: at least 10 bins required");
  auto rng = make_rng(seed);
  Matrix c_hat = sample_covariance(n, p, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(c_hat, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();

  const double c = static_cast<double>(p) / n;
  EigHistogram h;
  h.atom_weight = mp_atom_weight(c);
  const double lo = std::min(ev(0), mp_edge_lower(c));
  const double hi = std::max(ev(ev.size() - 1), mp_edge_upper(c));
  h.bin_width = (hi - lo) / bins;
  if (h.bin_width <= 0.0) throw NumericalError("eig_histogram: degenerate spectrum range");

  h.centers.resize(bins);
  h.density.assign(bins, 0.0);
  h.overlay.resize(bins);
  for (int b = 0; b < bins; ++b) {
    h.centers[b] = lo + (b + 0.5) * h.bin_width;
    h.overlay[b] = h.centers[b] > 0.0 ? mp_density(h.centers[b], c) : 0.0;
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    int b = static_cast<int>((ev(i) - lo) / h.bin_width);
    b = std::min(std::max(b, 0), bins - 1);
    h.density[b] += 1.0;
  }
  for (int b = 0; b < bins; ++b) h.density[b] /= p * h.bin_width;
  return h;
}

}  // namespace rff
