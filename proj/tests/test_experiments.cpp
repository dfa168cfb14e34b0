#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rff/errors.hpp"
#include "rff/experiments.hpp"
#include "rff/kernels.hpp"

using namespace rff;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

SweepConfig small_config() {
  SweepConfig c;
  c.kind = DatasetKind::synthetic;
  c.n = 60;
  c.n_hat = 30;
  c.p = 40;
  c.separation = 2.0;
  c.seed = 12;
  c.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("theory-only sweep fills theory columns and leaves empirical empty") {
  SweepConfig c = small_config();
  c.feature_counts = {20};
  c.lambdas = {0.5};
  c.trials = 0;
  auto records = run_sweep(c);
  REQUIRE(records.size() == 1);
  const ExperimentRecord& r = records.front();
  CHECK(r.n == 60);
  CHECK(r.feature_count == 20);
  CHECK(r.error.empty());
  CHECK(r.delta_cos.has_value());
  CHECK(r.e_train_theory.has_value());
  CHECK(r.e_test_theory.has_value());
  CHECK_FALSE(r.e_train_emp.has_value());
  CHECK(r.trials == 0);
}

TEST_CASE("sweep with trials populates empirical statistics close to theory") {
  SweepConfig c = small_config();
  c.feature_counts = {30, 90};
  c.lambdas = {0.2, 2.0};
  c.trials = 8;
  auto records = run_sweep(c);
  REQUIRE(records.size() == 4);
  for (const auto& r : records) {
    REQUIRE(r.error.empty());
    CHECK(r.trials == 8);
    CHECK(*r.e_train_emp ==
          doctest::Approx(*r.e_train_theory).epsilon(0.25));  // small n, loose band
    CHECK(*r.e_train_std >= 0.0);
  }
}

TEST_CASE("ratio grids resolve with rounding and gamma rows skip the boundary") {
  SweepConfig c = small_config();
  c.feature_ratios = {0.25, 0.5, 1.0};
  c.lambdas = {0.0, 1.0};  // 0 requests the ridgeless gamma path
  auto records = run_sweep(c);
  REQUIRE(records.size() == 6);

  // N = 15, 30, 60; the gamma cell at 2N = n must be flagged, not fatal
  CHECK(records[0].feature_count == 15);
  CHECK(records[0].gamma_cos.has_value());
  CHECK(records[2].feature_count == 30);
  CHECK_FALSE(records[2].gamma_cos.has_value());
  CHECK(records[2].error.find("boundary") != std::string::npos);
  CHECK(records[4].feature_count == 60);
  CHECK(records[4].gamma_cos.has_value());

  // delta rows exist at every N including the boundary
  for (int i : {1, 3, 5}) {
    CHECK(records[i].lambda == 1.0);
    CHECK(records[i].delta_cos.has_value());
    CHECK(records[i].det_omega_inv.has_value());
  }
}

TEST_CASE("csv round trip reproduces records exactly") {
  SweepConfig c = small_config();
  c.feature_counts = {20, 40};
  c.lambdas = {1e-3, 1.0};
  c.trials = 3;
  c.output_path = temp_path("rff_sweep_test.csv");
  auto records = run_sweep(c);
  auto parsed = read_csv(c.output_path);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].n == records[i].n);
    CHECK(parsed[i].feature_count == records[i].feature_count);
    CHECK(parsed[i].lambda == records[i].lambda);
    CHECK(parsed[i].delta_cos == records[i].delta_cos);
    CHECK(parsed[i].gamma_cos == records[i].gamma_cos);
    CHECK(parsed[i].det_omega_inv == records[i].det_omega_inv);
    CHECK(parsed[i].e_train_theory == records[i].e_train_theory);
    CHECK(parsed[i].e_test_theory == records[i].e_test_theory);
    CHECK(parsed[i].e_train_emp == records[i].e_train_emp);
    CHECK(parsed[i].e_test_std == records[i].e_test_std);
    CHECK(parsed[i].trials == records[i].trials);
    CHECK(parsed[i].error == records[i].error);
  }
}

TEST_CASE("identical configuration produces byte-identical csv") {
  SweepConfig c = small_config();
  c.feature_counts = {25};
  c.lambdas = {0.5, 5.0};
  c.trials = 4;
  c.output_path = temp_path("rff_repro_a.csv");
  run_sweep(c);
  std::string a_path = c.output_path;
  c.output_path = temp_path("rff_repro_b.csv");
  c.threads = 1;  // thread count must not affect the bytes
  run_sweep(c);

  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  CHECK(slurp(a_path) == slurp(c.output_path));
  CHECK(!slurp(a_path).empty());
}

TEST_CASE("lambda-opt recovers a planted interior minimum") {
  SweepConfig c = small_config();
  c.n = 80;
  c.n_hat = 40;
  c.feature_counts = {30};
  // theory test error is convex-ish in log lambda with an interior optimum
  c.lambdas.clear();
  for (double l = 1e-4; l <= 1e3; l *= std::sqrt(10.0)) c.lambdas.push_back(l);
  LambdaOptResult result = find_lambda_opt(c);
  CHECK_FALSE(result.boundary);
  // the optimum beats both neighbors on the profile
  double best = result.e_test;
  for (const auto& r : result.profile)
    if (r.e_test_theory) CHECK(best <= *r.e_test_theory + 1e-15);
}

TEST_CASE("lambda-opt flags a boundary minimum") {
  // a grid entirely above the optimum puts the minimum on the left endpoint
  SweepConfig c = small_config();
  c.feature_counts = {30};
  c.lambdas.clear();
  for (double l = 1e3; c.lambdas.size() < 10; l *= 2) c.lambdas.push_back(l);
  LambdaOptResult result = find_lambda_opt(c);
  CHECK(result.boundary);
  CHECK(result.lambda_opt == doctest::Approx(1e3));
}

TEST_CASE("phase report marks gamma rows and survives per-cell failures") {
  SweepConfig c = small_config();
  auto [train, test] = load_dataset(c);
  KernelPair k = kernel_components(train);
  auto records = phase_report(k, {15, 30, 60}, {0.0, 1e-3}, 2);
  REQUIRE(records.size() == 6);
  int gamma_rows = 0, flagged = 0, delta_rows = 0;
  for (const auto& r : records) {
    if (r.gamma_cos) ++gamma_rows;
    if (!r.error.empty()) ++flagged;
    if (r.delta_cos) ++delta_rows;
  }
  CHECK(gamma_rows == 2);  // boundary cell 2N = n skipped
  CHECK(flagged == 1);
  CHECK(delta_rows == 3);
}

TEST_CASE("similarity experiment validates its precondition") {
  SweepConfig c = small_config();
  c.feature_counts = {20};  // 2N != n
  c.sigma2_grid = {0.0};
  c.trials = 2;
  CHECK_THROWS_AS(similarity_threshold_experiment(c, 1e-3), ConfigError);
}

TEST_CASE("similarity experiment at sigma2 = 0 has equal train and test error") {
  SweepConfig c = small_config();
  c.n = 64;
  c.n_hat = 64;
  c.feature_counts = {32};
  c.sigma2_grid = {0.0, 1e-2};
  c.trials = 3;
  auto records = similarity_threshold_experiment(c, 1e-3);
  REQUIRE(records.size() == 2);
  CHECK(records[0].e_train == doctest::Approx(records[0].e_test).epsilon(1e-12));
  CHECK_FALSE(records[0].crossed);
  CHECK(records[1].e_test > records[1].e_train);

  const std::string path = temp_path("rff_similarity.csv");
  write_similarity_csv(path, records);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "sigma2,e_train,e_train_std,e_test,e_test_std,crossed");
}

TEST_CASE("sweep records a cell failure without aborting") {
  SweepConfig c = small_config();
  c.feature_counts = {30};
  c.lambdas = {0.0, 1.0};  // gamma at the boundary fails, delta succeeds
  auto records = run_sweep(c);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].error.empty());
  CHECK(records[1].error.empty());
}
