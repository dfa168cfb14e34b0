#include <doctest.h>

#include <cmath>

#include "rff/data.hpp"
#include "rff/empirical.hpp"
#include "rff/errors.hpp"
#include "rff/kernels.hpp"
#include "rff/linalg.hpp"

using namespace rff;

namespace {

struct EmpFixture {
  DataMatrix train, test;
};

const EmpFixture& fixture() {
  static EmpFixture fx = [] {
    EmpFixture f;
    std::tie(f.train, f.test) = synthetic_two_class(50, 25, 30, 2.0, 6);
    return f;
  }();
  return fx;
}

}  // namespace

TEST_CASE("feature map ranges and the zero-input case") {
  const auto& fx = fixture();
  FeatureMap fm = sample_features(fx.train, fx.test, 20, 3);
  CHECK(fm.sigma_train.rows() == 40);
  CHECK(fm.sigma_train.cols() == 50);
  CHECK(fm.sigma_test.cols() == 25);
  CHECK(fm.sigma_train.maxCoeff() <= 1.0);
  CHECK(fm.sigma_train.minCoeff() >= -1.0);

  DataMatrix zero;
  zero.x = Matrix::Zero(30, 4);
  zero.y = Vector::Ones(4);
  FeatureMap fz = sample_features(zero, 10, 5);
  CHECK(fz.sigma_train.topRows(10).minCoeff() == 1.0);            // cos block
  CHECK(fz.sigma_train.bottomRows(10).cwiseAbs().maxCoeff() == 0.0);  // sin block
}

TEST_CASE("ridge regressor") {
  const auto& fx = fixture();
  SUBCASE("zero targets give a zero regressor") {
    FeatureMap fm = sample_features(fx.train, fx.test, 10, 4);
    Vector beta = ridge_regressor(fm, Vector::Zero(50), 0.3);
    CHECK(beta.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("primal and dual forms agree near 2N = n") {
    // 2N = 48 < n = 50 exercises the primal branch; a 26-feature map with the
    // dual forced through the normal-equations oracle checks both.
    for (int feature_count : {24, 26}) {
      FeatureMap fm = sample_features(fx.train, fx.test, feature_count, 9);
      const double lambda = 0.05;
      Vector beta = ridge_regressor(fm, fx.train.y, lambda);

      // oracle: explicit normal equations in the primal dimension
      const Matrix& s = fm.sigma_train;
      const int n = 50;
      Matrix a = s * s.transpose() / n +
                 lambda * Matrix::Identity(2 * feature_count, 2 * feature_count);
      Vector expected = a.inverse() * (s * fx.train.y / n);
      CHECK((beta - expected).norm() / expected.norm() < 1e-8);
    }
  }
  SUBCASE("toy normal-equations oracle") {
    auto [toy_train, toy_test] = synthetic_two_class(3, 2, 4, 1.0, 41);
    FeatureMap fm = sample_features(toy_train, toy_test, 2, 8);
    const double lambda = 0.7;
    Vector beta = ridge_regressor(fm, toy_train.y, lambda);
    Matrix a = fm.sigma_train * fm.sigma_train.transpose() / 3.0 + lambda * Matrix::Identity(4, 4);
    Vector expected = a.inverse() * (fm.sigma_train * toy_train.y / 3.0);
    CHECK((beta - expected).norm() < 1e-10);
  }
  SUBCASE("lambda must be positive") {
    FeatureMap fm = sample_features(fx.train, fx.test, 5, 4);
    CHECK_THROWS_AS(ridge_regressor(fm, fx.train.y, 0.0), NumericalError);
  }
}

TEST_CASE("empirical mse") {
  const auto& fx = fixture();
  FeatureMap fm = sample_features(fx.train, fx.test, 15, 21);
  SUBCASE("zero regressor gives |y|^2 / n") {
    MsePair mse = empirical_mse(fm, Vector::Zero(30), fx.train.y, fx.test.y);
    CHECK(mse.train == doctest::Approx(fx.train.y.squaredNorm() / 50));
    CHECK(mse.test == doctest::Approx(fx.test.y.squaredNorm() / 25));
  }
  SUBCASE("training error equals the resolvent identity") {
    const double lambda = 0.2;
    Vector beta = ridge_regressor(fm, fx.train.y, lambda);
    MsePair mse = empirical_mse(fm, beta, fx.train.y, fx.test.y);
    Matrix q = resolvent(fm, lambda);
    const double via_resolvent = lambda * lambda * (q * fx.train.y).squaredNorm() / 50;
    CHECK(std::abs(mse.train - via_resolvent) < 1e-10);
  }
}

TEST_CASE("resolvent properties") {
  const auto& fx = fixture();
  FeatureMap fm = sample_features(fx.train, fx.test, 12, 33);
  SUBCASE("matches direct inversion on a toy") {
    auto [toy_train, toy_test] = synthetic_two_class(4, 2, 3, 1.0, 51);
    FeatureMap toy = sample_features(toy_train, toy_test, 3, 2);
    const double lambda = 0.6;
    Matrix gram = toy.sigma_train.transpose() * toy.sigma_train / 4.0 +
                  lambda * Matrix::Identity(4, 4);
    CHECK((resolvent(toy, lambda) - gram.inverse()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("norm bounded by 1/lambda") {
    for (double lambda : {0.01, 0.5, 3.0}) {
      Matrix q = resolvent(fm, lambda);
      CHECK(operator_norm_sym(q) <= 1.0 / lambda + 1e-9);
    }
  }
  SUBCASE("huge lambda collapses to lambda^-1 I within the Neumann bound") {
    const double lambda = 1e6;
    Matrix q = resolvent(fm, lambda);
    Matrix gram = fm.sigma_train.transpose() * fm.sigma_train / 50.0;
    const double bound = operator_norm_sym(gram) / (lambda * lambda);
    Matrix diff = q - Matrix::Identity(50, 50) / lambda;
    CHECK(operator_norm_sym(diff) <= bound * (1 + 1e-9));
  }
}

TEST_CASE("monte carlo reduction") {
  const auto& fx = fixture();
  SUBCASE("single trial has zero spread") {
    MonteCarloResult r = monte_carlo(fx.train, fx.test, 20, 0.5, 1, 17);
    CHECK(r.trials == 1);
    CHECK(r.std_train == 0.0);
    CHECK(r.std_test == 0.0);
  }
  SUBCASE("same master seed reproduces, threads do not matter") {
    MonteCarloResult a = monte_carlo(fx.train, fx.test, 20, 0.5, 6, 17, 1);
    MonteCarloResult b = monte_carlo(fx.train, fx.test, 20, 0.5, 6, 17, 2);
    CHECK(a.mean_train == b.mean_train);
    CHECK(a.mean_test == b.mean_test);
    CHECK(a.std_train == b.std_train);
  }
  SUBCASE("curve slices agree with single-lambda runs") {
    std::vector<double> lambdas = {0.1, 1.0, 4.0};
    auto curve = monte_carlo_curve(fx.train, fx.test, 20, lambdas, 5, 23);
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      MonteCarloResult single = monte_carlo(fx.train, fx.test, 20, lambdas[j], 5, 23);
      CHECK(curve[j].mean_train == single.mean_train);
      CHECK(curve[j].mean_test == single.mean_test);
    }
  }
}

TEST_CASE("gram matrix converges entrywise but not in operator norm") {
  // entrywise: n = 5 points, N = 1e5 features, 3-standard-error band
  DataMatrix small = synthetic_gaussian(5, 16, 61);
  small.x /= 4.0;  // unit-ish norms
  KernelPair k = kernel_components(small);
  DataMatrix dummy;
  dummy.x = small.x.leftCols(1);
  dummy.y = Vector::Ones(1);
  const int big_n = 100000;
  FeatureMap fm = sample_features(small, dummy, big_n, 71);
  Matrix gram = fm.sigma_train.transpose() * fm.sigma_train / double(big_n);
  double max_entry_err = (gram - k.gaussian()).cwiseAbs().maxCoeff();
  CHECK(max_entry_err < 3.0 / std::sqrt(double(big_n)) + 1e-6);

  // operator norm at n = N = 512: the gap does not shrink with the entries
  DataMatrix big = synthetic_gaussian(512, 256, 62);
  big.x /= 16.0;
  KernelPair kb = kernel_components(big);
  FeatureMap fb = sample_features(big, 512, 72);
  Matrix gram_b = fb.sigma_train.transpose() * fb.sigma_train / 512.0;
  Matrix diff = gram_b - kb.gaussian();
  const double entry_gap = diff.cwiseAbs().maxCoeff();
  const double op_gap = operator_norm_sym(0.5 * (diff + diff.transpose()));
  CHECK(op_gap > 10.0 * entry_gap);
}
