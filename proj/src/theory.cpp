#include "rff/theory.hpp"

#include <cmath>
#include <functional>
#include <utility>

#include "rff/empirical.hpp"
#include "rff/errors.hpp"
#include "rff/rng.hpp"

namespace rff {

namespace {

void require_symmetric(const KernelPair& k, const char* what) {
  if (!k.symmetric || k.rows() != k.cols())
    throw ShapeError(std::string(what) + ": symmetric kernel pair required");
}

// Normalized traces of products with the resolvent q:
//   f_st = (1/n) tr(q K_s q K_t),  g_s = (1/n) tr(q K_s q).
// f_cs is accumulated coefficient-symmetrically so exchanging the two kernel
// components permutes every downstream quantity bit for bit.
struct ResolventTraces {
  double f_cc, f_cs, f_ss;
  double g_cos, g_sin;
};

ResolventTraces resolvent_traces(const KernelPair& k, const Matrix& q) {
  const double n = static_cast<double>(q.rows());
  Matrix ac = k.k_cos * q;
  Matrix as = k.k_sin * q;
  ResolventTraces t;
  t.f_cc = ac.cwiseProduct(ac.transpose()).sum() / n;
  t.f_ss = as.cwiseProduct(as.transpose()).sum() / n;
  t.f_cs = 0.5 * (ac.cwiseProduct(as.transpose()) + as.cwiseProduct(ac.transpose())).sum() / n;
  t.g_cos = q.cwiseProduct(ac.transpose()).sum() / n;
  t.g_sin = q.cwiseProduct(as.transpose()).sum() / n;
  return t;
}

struct FixedPoint2d {
  double x0 = 0.0, x1 = 0.0;
  Matrix resolvent;
  int iterations = 0;
  double residual = 0.0;
};

struct Map2d {
  std::function<Matrix(double, double)> resolvent;
  std::function<std::pair<double, double>(const Matrix&)> image;
  std::function<Eigen::Matrix2d(const Matrix&, double, double)> jacobian;
  double lower_bound = 0.0;
};

double fp_residual(double f0, double f1, double x0, double x1) {
  return std::max(std::abs(f0 - x0) / (1.0 + std::abs(x0)),
                  std::abs(f1 - x1) / (1.0 + std::abs(x1)));
}

// Solves x = F(x) for the monotone 2-d maps of this module. The plain
// iteration converges globally for these maps but its rate degrades to
// 1 - O(lambda) near the interpolation threshold, so a damped Newton step
// (built from the same traces that define Omega^-1) is tried first and the
// plain step is the fallback.
FixedPoint2d solve_map(const Map2d& map, double x0, double x1, const SolveOptions& opts,
                       const char* what) {
  double a = x0, b = x1;
  Matrix q = map.resolvent(a, b);
  auto [fa, fb] = map.image(q);
  double res = fp_residual(fa, fb, a, b);
  int it = 0;

  while (res > opts.tol && it < opts.max_iter) {
    ++it;
    const double ga = fa - a, gb = fb - b;
    bool stepped = false;

    Eigen::Matrix2d j = map.jacobian(q, a, b);
    const double m00 = 1.0 - j(0, 0), m01 = -j(0, 1);
    const double m10 = -j(1, 0), m11 = 1.0 - j(1, 1);
    const double det = m00 * m11 - m01 * m10;
    if (det > 0.0 && std::isfinite(det)) {
      // adjugate solve keeps the component-exchange symmetry exact
      const double d0 = (m11 * ga - m01 * gb) / det;
      const double d1 = (m00 * gb - m10 * ga) / det;
      double step = 1.0;
      for (int bt = 0; bt < 6 && !stepped; ++bt, step *= 0.5) {
        const double ca = a + step * d0, cb = b + step * d1;
        if (!(ca >= map.lower_bound) || !(cb >= map.lower_bound) ||
            !std::isfinite(ca) || !std::isfinite(cb))
          continue;
        Matrix cq = map.resolvent(ca, cb);
        auto [cfa, cfb] = map.image(cq);
        const double cres = fp_residual(cfa, cfb, ca, cb);
        if (cres < res) {
          a = ca; b = cb;
          q = std::move(cq);
          fa = cfa; fb = cfb;
          res = cres;
          stepped = true;
        }
      }
    }

    if (!stepped) {
      const double ca = std::max(fa, map.lower_bound);
      const double cb = std::max(fb, map.lower_bound);
      q = map.resolvent(ca, cb);
      std::tie(fa, fb) = map.image(q);
      a = ca; b = cb;
      res = fp_residual(fa, fb, a, b);
    }
  }

  if (res > opts.tol)
    throw ConvergenceError(std::string(what) + ": no convergence after " +
                           std::to_string(opts.max_iter) + " iterations (residual " +
                           std::to_string(res) + ")");
  FixedPoint2d out;
  out.x0 = a;
  out.x1 = b;
  out.resolvent = std::move(q);
  out.iterations = it;
  out.residual = res;
  return out;
}

std::pair<double, double> trace_image(const KernelPair& k, const Matrix& q, double denom) {
  return {k.k_cos.cwiseProduct(q.transpose()).sum() / denom,
          k.k_sin.cwiseProduct(q.transpose()).sum() / denom};
}

Matrix symmetrized(Matrix m) {
  m = 0.5 * (m + m.transpose()).eval();
  return m;
}

}  // namespace

FixedPointSolution solve_delta(const KernelPair& k, int feature_count, double lambda,
                               const SolveOptions& opts) {
  require_symmetric(k, "solve_delta");
  if (lambda <= 0.0) throw NumericalError("solve_delta: lambda must be positive");
  if (feature_count < 0) throw NumericalError("solve_delta: feature count must be nonnegative");
  const int n = k.rows();
  const double ratio = static_cast<double>(feature_count) / n;

  Map2d map;
  map.resolvent = [&](double a, double b) {
    Matrix m = ratio * (k.k_cos / (1.0 + a) + k.k_sin / (1.0 + b));
    m.diagonal().array() += lambda;
    return symmetrized(spd_inverse(m, "solve_delta"));
  };
  map.image = [&](const Matrix& q) { return trace_image(k, q, static_cast<double>(n)); };
  map.jacobian = [&](const Matrix& q, double a, double b) {
    ResolventTraces t = resolvent_traces(k, q);
    Eigen::Matrix2d j;
    j(0, 0) = ratio * t.f_cc / ((1.0 + a) * (1.0 + a));
    j(0, 1) = ratio * t.f_cs / ((1.0 + b) * (1.0 + b));
    j(1, 0) = ratio * t.f_cs / ((1.0 + a) * (1.0 + a));
    j(1, 1) = ratio * t.f_ss / ((1.0 + b) * (1.0 + b));
    return j;
  };

  FixedPoint2d fp = solve_map(map, opts.init_cos, opts.init_sin, opts, "solve_delta");
  FixedPointSolution out;
  out.delta_cos = fp.x0;
  out.delta_sin = fp.x1;
  out.q_bar = std::move(fp.resolvent);
  out.iterations = fp.iterations;
  out.residual = fp.residual;
  out.lambda = lambda;
  out.feature_count = feature_count;
  return out;
}

GammaSolution solve_gamma(const KernelPair& k, int feature_count, const SolveOptions& opts) {
  require_symmetric(k, "solve_gamma");
  const int n = k.rows();
  if (2 * feature_count == n)
    throw PhaseBoundaryError("solve_gamma: 2N == n is the singular phase boundary");
  const double ratio = static_cast<double>(feature_count) / n;
  constexpr double kGuard = 1e-300;

  GammaSolution out;
  Map2d map;
  if (2 * feature_count < n) {
    out.regime = Regime::under;
    map.lower_bound = kGuard;
    map.resolvent = [&](double a, double b) {
      Matrix m = ratio * (k.k_cos / a + k.k_sin / b);
      m.diagonal().array() += 1.0;
      return symmetrized(spd_inverse(m, "solve_gamma"));
    };
    map.image = [&](const Matrix& q) { return trace_image(k, q, static_cast<double>(n)); };
    map.jacobian = [&](const Matrix& q, double a, double b) {
      ResolventTraces t = resolvent_traces(k, q);
      Eigen::Matrix2d j;
      j(0, 0) = ratio * t.f_cc / (a * a);
      j(0, 1) = ratio * t.f_cs / (b * b);
      j(1, 0) = ratio * t.f_cs / (a * a);
      j(1, 1) = ratio * t.f_ss / (b * b);
      return j;
    };
    // start from the image of gamma -> infinity, above the fixed point
    const double c0 = std::max(k.k_cos.trace() / n, kGuard);
    const double s0 = std::max(k.k_sin.trace() / n, kGuard);
    FixedPoint2d fp = solve_map(map, c0, s0, opts, "solve_gamma");
    if (fp.x0 <= 2.0 * kGuard || fp.x1 <= 2.0 * kGuard)
      throw ConvergenceError("solve_gamma: positivity guard bound at exit");
    out.gamma_cos = fp.x0;
    out.gamma_sin = fp.x1;
    out.scaled_resolvent = std::move(fp.resolvent);
    out.iterations = fp.iterations;
    out.residual = fp.residual;
  } else {
    out.regime = Regime::over;
    map.resolvent = [&](double a, double b) {
      Matrix m = k.k_cos / (1.0 + a) + k.k_sin / (1.0 + b);
      return symmetrized(spd_inverse(m, "solve_gamma"));
    };
    map.image = [&](const Matrix& q) {
      return trace_image(k, q, static_cast<double>(feature_count));
    };
    map.jacobian = [&](const Matrix& q, double a, double b) {
      ResolventTraces t = resolvent_traces(k, q);
      const double scale = static_cast<double>(n) / feature_count;
      Eigen::Matrix2d j;
      j(0, 0) = scale * t.f_cc / ((1.0 + a) * (1.0 + a));
      j(0, 1) = scale * t.f_cs / ((1.0 + b) * (1.0 + b));
      j(1, 0) = scale * t.f_cs / ((1.0 + a) * (1.0 + a));
      j(1, 1) = scale * t.f_ss / ((1.0 + b) * (1.0 + b));
      return j;
    };
    FixedPoint2d fp = solve_map(map, 0.0, 0.0, opts, "solve_gamma");
    out.gamma_cos = fp.x0;
    out.gamma_sin = fp.x1;
    out.scaled_resolvent = (fp.resolvent / ratio).eval();
    out.iterations = fp.iterations;
    out.residual = fp.residual;
  }
  return out;
}

namespace {

void require_consistent(const KernelPair& k, const FixedPointSolution& fp, int feature_count,
                        const char* what) {
  require_symmetric(k, what);
  if (fp.n() != k.rows()) throw ShapeError(std::string(what) + ": solution size does not match kernel");
  if (fp.feature_count != feature_count)
    throw NumericalError(std::string(what) + ": solution was computed for a different feature count");
}

}  // namespace

OmegaResult omega(const KernelPair& k, const FixedPointSolution& fp, int feature_count) {
  require_consistent(k, fp, feature_count, "omega");
  const int n = k.rows();
  const double ratio = static_cast<double>(feature_count) / n;
  const double wc = 1.0 + fp.delta_cos, ws = 1.0 + fp.delta_sin;
  ResolventTraces t = resolvent_traces(k, fp.q_bar);

  const double phi_cs = ratio * t.f_cs / (wc * ws);

  // At the fixed point 1 - phi_cc = u + phi_cs and 1 - phi_ss = v + phi_cs
  // with u, v sums of positive terms, so the determinant
  //   det(Omega^-1) = u v + (u + v) phi_cs
  // is evaluated without cancellation; this preserves the O(lambda) scaling
  // at 2N = n that the raw 2x2 determinant would lose.
  const double u = 1.0 / wc + fp.lambda * t.g_cos / wc;
  const double v = 1.0 / ws + fp.lambda * t.g_sin / ws;
  const double det = u * v + (u + v) * phi_cs;
  if (!(det > 0.0) || !std::isfinite(det))
    throw DegeneracyError("omega: det(Omega^-1) is not positive");

  OmegaResult out;
  out.det_omega_inv = det;
  out.omega(0, 0) = (v + phi_cs) / det;
  out.omega(0, 1) = phi_cs * wc / ws / det;
  out.omega(1, 0) = phi_cs * ws / wc / det;
  out.omega(1, 1) = (u + phi_cs) / det;
  if (!(out.omega.minCoeff() > 0.0) && feature_count > 0)
    throw DegeneracyError("omega: entries are not all positive");
  return out;
}

double train_mse_theory(const KernelPair& k, const Vector& y, const FixedPointSolution& fp,
                        int feature_count, double lambda) {
  require_consistent(k, fp, feature_count, "train_mse_theory");
  if (y.size() != k.rows()) throw ShapeError("train_mse_theory: target size mismatch");
  if (lambda != fp.lambda)
    throw NumericalError("train_mse_theory: lambda does not match the fixed-point solution");
  const int n = k.rows();
  const double ratio = static_cast<double>(feature_count) / n;
  const double wc = 1.0 + fp.delta_cos, ws = 1.0 + fp.delta_sin;

  Vector qy = fp.q_bar * y;
  const double first = lambda * lambda * qy.squaredNorm() / n;

  OmegaResult om = omega(k, fp, feature_count);
  ResolventTraces t = resolvent_traces(k, fp.q_bar);
  Eigen::RowVector2d row(t.g_cos / (wc * wc), t.g_sin / (ws * ws));
  Eigen::Vector2d col(qy.dot(k.k_cos * qy), qy.dot(k.k_sin * qy));
  const double second = ratio * lambda * lambda / n * (row * om.omega * col)(0);
  return first + second;
}

ThetaPair theta_sigma(const KernelPair& k_train, const KernelPair& k_cross,
                      const KernelPair& k_test, const FixedPointSolution& fp, int feature_count) {
  require_consistent(k_train, fp, feature_count, "theta_sigma");
  const int n = k_train.rows();
  const int n_hat = k_cross.rows();
  if (k_cross.cols() != n) throw ShapeError("theta_sigma: cross kernel must be n_hat x n");
  if (k_test.rows() != n_hat || k_test.cols() != n_hat)
    throw ShapeError("theta_sigma: test kernel must be n_hat x n_hat");
  if (feature_count <= 0) throw NumericalError("theta_sigma: feature count must be positive");

  const double ratio = static_cast<double>(feature_count) / n;
  const double wc = 1.0 + fp.delta_cos, ws = 1.0 + fp.delta_sin;
  Matrix phi_hat = k_cross.k_cos / wc + k_cross.k_sin / ws;  // n_hat x n
  Matrix b = phi_hat * fp.q_bar;                             // phi_hat q

  auto theta_one = [&](const Matrix& k_sigma_train, const Matrix& k_sigma_cross,
                       const Matrix& k_sigma_test) {
    const double lead = k_sigma_test.trace() / feature_count;
    const double quad = ratio / n * b.cwiseProduct(b * k_sigma_train).sum();
    const double cross = 2.0 / n * b.cwiseProduct(k_sigma_cross).sum();
    return lead + quad - cross;
  };

  ThetaPair out;
  out.theta_cos = theta_one(k_train.k_cos, k_cross.k_cos, k_test.k_cos);
  out.theta_sin = theta_one(k_train.k_sin, k_cross.k_sin, k_test.k_sin);
  return out;
}

double test_mse_theory(const KernelPair& k_train, const KernelPair& k_cross,
                       const KernelPair& k_test, const Vector& y, const Vector& y_hat,
                       const FixedPointSolution& fp, int feature_count) {
  require_consistent(k_train, fp, feature_count, "test_mse_theory");
  const int n = k_train.rows();
  const int n_hat = k_cross.rows();
  if (y.size() != n) throw ShapeError("test_mse_theory: train target size mismatch");
  if (y_hat.size() != n_hat) throw ShapeError("test_mse_theory: test target size mismatch");

  const double ratio = static_cast<double>(feature_count) / n;
  const double wc = 1.0 + fp.delta_cos, ws = 1.0 + fp.delta_sin;
  Matrix phi_hat = k_cross.k_cos / wc + k_cross.k_sin / ws;

  Vector qy = fp.q_bar * y;
  Vector pred = ratio * (phi_hat * qy);
  const double first = (y_hat - pred).squaredNorm() / n_hat;

  ThetaPair th = theta_sigma(k_train, k_cross, k_test, fp, feature_count);
  OmegaResult om = omega(k_train, fp, feature_count);
  Eigen::RowVector2d row(th.theta_cos / (wc * wc), th.theta_sin / (ws * ws));
  Eigen::Vector2d col(qy.dot(k_train.k_cos * qy), qy.dot(k_train.k_sin * qy));
  const double second = ratio * ratio / n_hat * (row * om.omega * col)(0);
  return first + second;
}

Matrix eqaq_equivalent(const KernelPair& k, const Matrix& a, const FixedPointSolution& fp,
                       int feature_count) {
  require_consistent(k, fp, feature_count, "eqaq_equivalent");
  const int n = k.rows();
  if (a.rows() != n || a.cols() != n) throw ShapeError("eqaq_equivalent: A must be n x n");
  if (!a.isApprox(a.transpose(), 1e-12)) throw ShapeError("eqaq_equivalent: A must be symmetric");

  const double ratio = static_cast<double>(feature_count) / n;
  const double wc = 1.0 + fp.delta_cos, ws = 1.0 + fp.delta_sin;

  Matrix qaq = fp.q_bar * a * fp.q_bar;
  const double tc = qaq.cwiseProduct(k.k_cos).sum() / n;
  const double ts = qaq.cwiseProduct(k.k_sin).sum() / n;

  OmegaResult om = omega(k, fp, feature_count);
  Eigen::RowVector2d weights =
      Eigen::RowVector2d(tc / (wc * wc), ts / (ws * ws)) * om.omega;

  Matrix qkq_cos = fp.q_bar * k.k_cos * fp.q_bar;
  Matrix qkq_sin = fp.q_bar * k.k_sin * fp.q_bar;
  return qaq + ratio * (weights(0) * qkq_cos + weights(1) * qkq_sin);
}

double resolvent_gap(const DataMatrix& x, int feature_count, double lambda, int trials,
                     std::uint64_t seed, int threads) {
  if (trials < 1) throw NumericalError("resolvent_gap: trials must be >= 1");
  KernelPair k = kernel_components(x);
  FixedPointSolution fp = solve_delta(k, feature_count, lambda);

  const int n = x.n();
  std::vector<Matrix> per_trial(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    FeatureMap fm = sample_features(x, feature_count, derive_seed(seed, t));
    per_trial[t] = resolvent(fm, lambda);
  });
  Matrix mean_q = Matrix::Zero(n, n);
  for (const Matrix& q : per_trial) mean_q += q;
  mean_q /= static_cast<double>(trials);
  return operator_norm_sym(mean_q - fp.q_bar);
}

MonotonicityReport delta_derivative_signs(const KernelPair& k, int feature_count, double lambda,
                                          const std::vector<double>& lambda_grid,
                                          const std::vector<int>& feature_grid) {
  require_symmetric(k, "delta_derivative_signs");
  MonotonicityReport report;

  auto check_decreasing = [&report](const std::vector<double>& seq, const char* name,
                                    const std::string& axis) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (!(seq[i] < seq[i - 1]))
        report.violations.push_back(std::string(name) + " not strictly decreasing along the " +
                                    axis + " grid at index " + std::to_string(i));
    }
  };

  if (lambda_grid.size() > 1) {
    for (std::size_t i = 1; i < lambda_grid.size(); ++i)
      if (!(lambda_grid[i] > lambda_grid[i - 1]) || !(lambda_grid[i - 1] > 0.0))
        throw NumericalError("delta_derivative_signs: lambda grid must be positive increasing");
    SolveOptions opts;
    for (double lam : lambda_grid) {
      FixedPointSolution fp = solve_delta(k, feature_count, lam, opts);
      report.lambda_grid.push_back(lam);
      report.delta_cos_vs_lambda.push_back(fp.delta_cos);
      report.delta_sin_vs_lambda.push_back(fp.delta_sin);
    }
    check_decreasing(report.delta_cos_vs_lambda, "delta_cos", "lambda");
    check_decreasing(report.delta_sin_vs_lambda, "delta_sin", "lambda");
  }

  if (feature_grid.size() > 1) {
    for (std::size_t i = 1; i < feature_grid.size(); ++i)
      if (!(feature_grid[i] > feature_grid[i - 1]))
        throw NumericalError("delta_derivative_signs: feature grid must be strictly increasing");
    SolveOptions opts;
    for (int nf : feature_grid) {
      FixedPointSolution fp = solve_delta(k, nf, lambda, opts);
      report.feature_grid.push_back(nf);
      report.delta_cos_vs_features.push_back(fp.delta_cos);
      report.delta_sin_vs_features.push_back(fp.delta_sin);
    }
    check_decreasing(report.delta_cos_vs_features, "delta_cos", "feature");
    check_decreasing(report.delta_sin_vs_features, "delta_sin", "feature");
  }
  return report;
}

double gaussian_limit_train_mse(const Matrix& k, const Vector& y, int feature_count,
                                double lambda) {
  const int n = static_cast<int>(k.rows());
  if (y.size() != n) throw ShapeError("gaussian_limit_train_mse: target size mismatch");
  Matrix m = (static_cast<double>(feature_count) / n) * k;
  m.diagonal().array() += lambda;
  Vector qy = spd_solve(m, y, "gaussian_limit_train_mse");
  return lambda * lambda * qy.squaredNorm() / n;
}

double gaussian_limit_test_mse(const Matrix& k_train, const Matrix& k_cross, const Vector& y,
                               const Vector& y_hat) {
  if (k_cross.cols() != k_train.rows())
    throw ShapeError("gaussian_limit_test_mse: kernel shapes inconsistent");
  Eigen::LDLT<Matrix> ldlt(k_train);
  if (ldlt.info() != Eigen::Success)
    throw DegeneracyError("gaussian_limit_test_mse: kernel factorization failed");
  Vector pred = k_cross * ldlt.solve(y);
  return (y_hat - pred).squaredNorm() / y_hat.size();
}

}  // namespace rff
