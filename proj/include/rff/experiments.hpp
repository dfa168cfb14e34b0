#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rff/data.hpp"
#include "rff/kernels.hpp"
#include "rff/linalg.hpp"

namespace rff {

enum class DatasetKind { idx, synthetic };

struct SweepConfig {
  DatasetKind kind = DatasetKind::synthetic;
  std::string images_path;
  std::string labels_path;
  int class_a = 3;
  int class_b = 7;
  int n = 1000;
  int n_hat = 500;
  int p = 784;             // synthetic dimension; idx data fixes p itself
  double separation = 2.0; // class-mean separation of the synthetic mixture

  // Feature grid: explicit counts, or N/n ratios rounded to nearest integer.
  std::vector<int> feature_counts;
  std::vector<double> feature_ratios;

  // lambda == 0 entries request the ridgeless gamma path of that cell.
  std::vector<double> lambdas;

  std::vector<double> sigma2_grid;  // similarity experiment noise levels
  int trials = 0;                   // 0 = theory only
  std::uint64_t seed = 42;
  int threads = 1;
  std::string output_path;
};

// One grid cell. Empty optionals serialize as empty CSV fields.
struct ExperimentRecord {
  int n = 0;
  int p = 0;
  int feature_count = 0;
  double lambda = 0.0;
  std::optional<double> delta_cos, delta_sin;
  std::optional<double> gamma_cos, gamma_sin;
  std::optional<double> det_omega_inv;
  std::optional<double> e_train_theory, e_test_theory;
  std::optional<double> e_train_emp, e_train_std, e_test_emp, e_test_std;
  int trials = 0;
  std::string error;
};

struct SimilarityRecord {
  double sigma2 = 0.0;
  double e_train = 0.0, e_train_std = 0.0;
  double e_test = 0.0, e_test_std = 0.0;
  bool crossed = false;  // e_test > 2 * e_train
};

struct LambdaOptResult {
  double lambda_opt = 0.0;
  double e_test = 0.0;
  bool boundary = false;  // minimum sits on a grid endpoint
  std::vector<ExperimentRecord> profile;
};

// Load (idx) or generate (synthetic mixture) the train/test pair, jointly
// normalized.
std::pair<DataMatrix, DataMatrix> load_dataset(const SweepConfig& config);

// Resolved feature grid (ratios rounded, floor 1, except an explicit 0).
std::vector<int> resolve_feature_grid(const SweepConfig& config);

// Theory on every (N, lambda) cell, Monte-Carlo when trials >= 1. Cell
// failures are recorded in the error column; the sweep always completes.
std::vector<ExperimentRecord> run_sweep(const SweepConfig& config);
std::vector<ExperimentRecord> run_sweep_on(const DataMatrix& train, const DataMatrix& test,
                                           const SweepConfig& config);

// Grid search of the theory test error over config.lambdas at a single
// feature count, refined by one local bisection pass in log-lambda.
LambdaOptResult find_lambda_opt(const SweepConfig& config);

// Train/test MSE as the test set drifts away from the training set,
// X_hat = X + sigma * eps, at the interpolation threshold 2N = n.
std::vector<SimilarityRecord> similarity_threshold_experiment(const SweepConfig& config,
                                                              double lambda);

// delta / gamma / det(Omega^-1) across a feature grid for each lambda;
// lambda == 0 rows use the gamma path and skip the 2N = n boundary.
std::vector<ExperimentRecord> phase_report(const KernelPair& k,
                                           const std::vector<int>& feature_grid,
                                           const std::vector<double>& lambdas, int threads = 1);

// Fixed-header CSV, floating point at 17 significant digits; parsing an
// emitted file reproduces the records exactly.
void write_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_csv(const std::string& path);
void write_similarity_csv(const std::string& path, const std::vector<SimilarityRecord>& records);

}  // namespace rff
