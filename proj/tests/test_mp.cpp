#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rff/errors.hpp"
#include "rff/mp.hpp"

using namespace rff;

TEST_CASE("stieltjes root satisfies its quadratic across the parameter box") {
  // residual is normalized by the term magnitudes: at corners like
  // (lambda=1e-4, c=1e2) the polynomial cancels 1e6-scale terms, so a raw
  // 1e-12 bound is below what double arithmetic can even evaluate
  for (double lambda : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
    for (double c : {1e-3, 0.04, 0.5, 1.0, 7.0, 1e2}) {
      const double m = mp_stieltjes(lambda, c);
      CHECK(m > 0.0);
      const double t1 = c * lambda * m * m;
      const double t2 = (1 + lambda - c) * m;
      const double scale = std::abs(t1) + std::abs(t2) + 1.0;
      CHECK(std::abs(t1 + t2 - 1) / scale < 1e-12);
    }
  }
}

TEST_CASE("stieltjes closed forms") {
  // c = 1, lambda = 1: m^2 + m - 1 = 0
  CHECK(mp_stieltjes(1.0, 1.0) == doctest::Approx(0.6180339887498949).epsilon(1e-14));
  // c -> 0 degenerates to 1/(1+lambda)
  CHECK(mp_stieltjes(0.5, 1e-14) == doctest::Approx(1.0 / 1.5).epsilon(1e-10));
}

TEST_CASE("density support and normalization") {
  SUBCASE("support has length 4 sqrt(c)") {
    const double c = 0.01;
    CHECK(mp_edge_upper(c) - mp_edge_lower(c) == doctest::Approx(4 * std::sqrt(c)).epsilon(1e-14));
    CHECK(mp_density(mp_edge_lower(c) / 2, c) == 0.0);
    CHECK(mp_density(mp_edge_upper(c) * 1.01, c) == 0.0);
    CHECK(mp_density(1.0, c) > 0.0);
  }
  SUBCASE("quadrature oracle: continuous mass is min(1, 1/c)") {
    for (double c : {0.25, 1.0, 2.0}) {
      // Simpson after x = lo + (hi-lo) sin^2(theta), which removes the
      // square-root edge singularities
      const double lo = mp_edge_lower(c), hi = mp_edge_upper(c);
      const int steps = 4000;
      const double h = std::numbers::pi / 2 / steps;
      double mass = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double theta = i * h;
        const double s = std::sin(theta);
        const double x = lo + (hi - lo) * s * s;
        // at c = 1 the lower edge is 0 and the substituted integrand has the
        // finite limit hi / (pi c) there
        const double f = x > 0.0 ? mp_density(x, c) * (hi - lo) * std::sin(2 * theta)
                                 : hi / (std::numbers::pi * c);
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mass += w * f;
      }
      mass *= h / 3.0;
      const double expected = c <= 1.0 ? 1.0 : 1.0 / c;
      CHECK(mass == doctest::Approx(expected).epsilon(1e-6));
      CHECK(mass + mp_atom_weight(c) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(mp_density(0.0, 0.5), DataError);
    CHECK_THROWS_AS(mp_density(-1.0, 0.5), DataError);
    CHECK_THROWS_AS(mp_stieltjes(0.0, 0.5), DataError);
  }
}

TEST_CASE("sample covariance quadratic form at reduced size") {
  Vector a = Vector::Zero(128);
  a(3) = 1.0;
  QuadformResult q = sample_cov_quadform(a, 1280, 0.1, 10, 5, 2);
  CHECK(q.rmt == doctest::Approx(mp_stieltjes(0.1, 0.1)).epsilon(1e-15));
  CHECK(q.population == doctest::Approx(1.0 / 1.1).epsilon(1e-15));
  CHECK(std::abs(q.empirical - q.rmt) / q.rmt < 0.02);
  CHECK_THROWS_AS(sample_cov_quadform(2.0 * a, 128, 0.1, 2, 5), DataError);  // not unit
}

TEST_CASE("sample covariance norm gap at reduced size") {
  // theoretical edge prediction 2 sqrt(c) + c
  const int p = 128, n = 100 * p;
  const double predicted = 2 * std::sqrt(double(p) / n) + double(p) / n;
  const double gap = sample_cov_norm_gap(n, p, 5, 9, 2);
  CHECK(gap == doctest::Approx(predicted).epsilon(0.05));

  // consistency regime: n = 1e4 p with small p
  CHECK(sample_cov_norm_gap(160000, 16, 3, 11, 2) < 0.05);
}

TEST_CASE("eigenvalue histogram") {
  EigHistogram h = eig_histogram(25600, 256, 40, 13);
  SUBCASE("total mass is 1") {
    double mass = 0.0;
    for (double d : h.density) mass += d * h.bin_width;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("mass confined near the support for c = 0.01") {
    double outside = 0.0;
    for (std::size_t i = 0; i < h.centers.size(); ++i)
      if (h.centers[i] < 0.75 || h.centers[i] > 1.25) outside += h.density[i] * h.bin_width;
    CHECK(outside < 0.02);
  }
  SUBCASE("histogram tracks the limiting density") {
    // bin-count fluctuation near the steep support edges dominates the sup
    // gap (~0.7 at this size); the L1 distance is the stable fit metric
    double sup_gap = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < h.centers.size(); ++i) {
      sup_gap = std::max(sup_gap, std::abs(h.density[i] - h.overlay[i]));
      l1 += std::abs(h.density[i] - h.overlay[i]) * h.bin_width;
    }
    CHECK(l1 < 0.2);
    CHECK(sup_gap < 1.2);
  }
  SUBCASE("bin count validated") { CHECK_THROWS_AS(eig_histogram(100, 10, 5, 1), DataError); }
}
