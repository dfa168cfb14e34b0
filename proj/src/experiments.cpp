#include "rff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rff/empirical.hpp"
#include "rff/errors.hpp"
#include "rff/rng.hpp"
#include "rff/theory.hpp"

namespace rff {

namespace {

// fixed seed tags so every stage draws an independent stream from one master
constexpr std::uint64_t kDatasetTag = 0x64617461;
constexpr std::uint64_t kTrialTag = 0x7472696c;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

constexpr const char* kHeader =
    "n,p,N,lambda,delta_cos,delta_sin,gamma_cos,gamma_sin,det_omega_inv,"
    "e_train_theory,e_test_theory,e_train_emp,e_train_std,e_test_emp,e_test_std,trials,error";

}  // namespace

std::pair<DataMatrix, DataMatrix> load_dataset(const SweepConfig& config) {
  const std::uint64_t seed = derive_seed(config.seed, kDatasetTag);
  if (config.kind == DatasetKind::idx) {
    RawDataset raw = load_idx(config.images_path, config.labels_path);
    SplitSpec spec;
    spec.class_a = config.class_a;
    spec.class_b = config.class_b;
    spec.n_train = config.n;
    spec.n_test = config.n_hat;
    spec.seed = seed;
    auto [train, test] = make_binary_split(raw, spec);
    return normalize_joint(train, test);
  }
  return synthetic_two_class(config.n, config.n_hat, config.p, config.separation, seed);
}

std::vector<int> resolve_feature_grid(const SweepConfig& config) {
  std::vector<int> out = config.feature_counts;
  const int n = config.n;
  for (double r : config.feature_ratios) {
    if (r < 0.0) throw ConfigError("feature ratio must be nonnegative");
    int count = static_cast<int>(std::lround(r * n));
    out.push_back(r > 0.0 ? std::max(count, 1) : count);
  }
  if (out.empty()) throw ConfigError("empty feature grid");
  return out;
}

namespace {

struct TheoryCell {
  std::optional<double> delta_cos, delta_sin, gamma_cos, gamma_sin, det_omega_inv;
  std::optional<double> e_train, e_test;
  std::string error;
};

// Theory column for one feature count over a lambda list. Positive lambdas
// are solved in descending order so each solution warm-starts the next; the
// fixed point is unique, so warm starting changes nothing but the iteration
// count.
std::vector<TheoryCell> theory_column(const KernelPair& k_train, const KernelPair& k_cross,
                                      const KernelPair& k_test, const Vector& y,
                                      const Vector& y_hat, int feature_count,
                                      const std::vector<double>& lambdas) {
  std::vector<TheoryCell> cells(lambdas.size());
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });

  SolveOptions opts;
  bool warm = false;
  for (std::size_t idx : order) {
    TheoryCell& cell = cells[idx];
    const double lambda = lambdas[idx];
    try {
      if (lambda == 0.0) {
        GammaSolution g = solve_gamma(k_train, feature_count);
        cell.gamma_cos = g.gamma_cos;
        cell.gamma_sin = g.gamma_sin;
        continue;
      }
      FixedPointSolution fp = solve_delta(k_train, feature_count, lambda, warm ? opts : SolveOptions{});
      opts.init_cos = fp.delta_cos;
      opts.init_sin = fp.delta_sin;
      warm = true;
      cell.delta_cos = fp.delta_cos;
      cell.delta_sin = fp.delta_sin;
      cell.det_omega_inv = omega(k_train, fp, feature_count).det_omega_inv;
      cell.e_train = train_mse_theory(k_train, y, fp, feature_count, lambda);
      cell.e_test = test_mse_theory(k_train, k_cross, k_test, y, y_hat, fp, feature_count);
    } catch (const Error& e) {
      cell.error = e.what();
    }
  }
  return cells;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep(const SweepConfig& config) {
  auto [train, test] = load_dataset(config);
  return run_sweep_on(train, test, config);
}

std::vector<ExperimentRecord> run_sweep_on(const DataMatrix& train, const DataMatrix& test,
                                           const SweepConfig& config) {
  if (config.lambdas.empty()) throw ConfigError("empty lambda grid");
  const std::vector<int> features = resolve_feature_grid(config);

  KernelPair k_train = kernel_components(train);
  KernelPair k_cross = kernel_components(test, train);
  KernelPair k_test = kernel_components(test);

  std::vector<double> positive_lambdas;
  for (double l : config.lambdas) {
    if (l < 0.0) throw ConfigError("lambda must be nonnegative (0 selects the gamma path)");
    if (l > 0.0) positive_lambdas.push_back(l);
  }

  std::vector<std::vector<TheoryCell>> theory(features.size());
  parallel_for(static_cast<std::int64_t>(features.size()), config.threads, [&](std::int64_t i) {
    theory[i] = theory_column(k_train, k_cross, k_test, train.y, test.y, features[i],
                              config.lambdas);
  });

  std::vector<ExperimentRecord> records;
  records.reserve(features.size() * config.lambdas.size());
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    std::vector<MonteCarloResult> mc;
    if (config.trials >= 1 && features[fi] >= 1 && !positive_lambdas.empty()) {
      mc = monte_carlo_curve(train, test, features[fi], positive_lambdas, config.trials,
                             derive_seed(config.seed, kTrialTag + fi), config.threads);
    }
    std::size_t mc_index = 0;
    for (std::size_t li = 0; li < config.lambdas.size(); ++li) {
      ExperimentRecord rec;
      rec.n = train.n();
      rec.p = train.p();
      rec.feature_count = features[fi];
      rec.lambda = config.lambdas[li];
      const TheoryCell& cell = theory[fi][li];
      rec.delta_cos = cell.delta_cos;
      rec.delta_sin = cell.delta_sin;
      rec.gamma_cos = cell.gamma_cos;
      rec.gamma_sin = cell.gamma_sin;
      rec.det_omega_inv = cell.det_omega_inv;
      rec.e_train_theory = cell.e_train;
      rec.e_test_theory = cell.e_test;
      rec.error = cell.error;
      if (config.lambdas[li] > 0.0) {
        if (!mc.empty()) {
          const MonteCarloResult& r = mc[mc_index];
          rec.e_train_emp = r.mean_train;
          rec.e_train_std = r.std_train;
          rec.e_test_emp = r.mean_test;
          rec.e_test_std = r.std_test;
          rec.trials = r.trials;
        }
        ++mc_index;
      }
      records.push_back(std::move(rec));
    }
  }
  if (!config.output_path.empty()) write_csv(config.output_path, records);
  return records;
}

LambdaOptResult find_lambda_opt(const SweepConfig& config) {
  std::vector<int> features = resolve_feature_grid(config);
  if (features.size() != 1)
    throw ConfigError("find_lambda_opt expects a single feature count");
  if (config.lambdas.size() < 10)
    throw ConfigError("find_lambda_opt needs a lambda grid of at least 10 points");
  for (double l : config.lambdas)
    if (l <= 0.0) throw ConfigError("find_lambda_opt needs strictly positive lambdas");

  SweepConfig grid_config = config;
  grid_config.trials = 0;
  grid_config.output_path.clear();
  auto [train, test] = load_dataset(config);
  std::vector<ExperimentRecord> profile = run_sweep_on(train, test, grid_config);

  std::vector<double> lambdas = config.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<std::pair<double, double>> curve;  // (lambda, e_test) of clean cells
  for (double lam : lambdas) {
    for (const ExperimentRecord& r : profile) {
      if (r.lambda == lam && r.error.empty() && r.e_test_theory) {
        curve.emplace_back(lam, *r.e_test_theory);
        break;
      }
    }
  }
  if (curve.empty()) throw NumericalError("find_lambda_opt: no cell converged");

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].second < curve[best].second) best = i;

  LambdaOptResult out;
  out.profile = std::move(profile);
  out.boundary = (best == 0 || best + 1 == curve.size());
  out.lambda_opt = curve[best].first;
  out.e_test = curve[best].second;
  if (out.boundary) return out;

  // one bisection pass: probe the log-midpoints of the bracketing interval
  KernelPair k_train = kernel_components(train);
  KernelPair k_cross = kernel_components(test, train);
  KernelPair k_test = kernel_components(test);
  const int feature_count = features.front();
  auto evaluate = [&](double lam) {
    FixedPointSolution fp = solve_delta(k_train, feature_count, lam);
    return test_mse_theory(k_train, k_cross, k_test, train.y, test.y, fp, feature_count);
  };
  for (double lam : {std::sqrt(curve[best - 1].first * curve[best].first),
                     std::sqrt(curve[best].first * curve[best + 1].first)}) {
    try {
      const double e = evaluate(lam);
      if (e < out.e_test) {
        out.e_test = e;
        out.lambda_opt = lam;
      }
    } catch (const Error&) {
      // probe failures leave the grid optimum in place
    }
  }
  return out;
}

std::vector<SimilarityRecord> similarity_threshold_experiment(const SweepConfig& config,
                                                              double lambda) {
  std::vector<int> features = resolve_feature_grid(config);
  if (features.size() != 1)
    throw ConfigError("similarity experiment expects a single feature count");
  const int feature_count = features.front();
  if (2 * feature_count != config.n)
    throw ConfigError("similarity experiment requires 2N == n");
  if (config.sigma2_grid.empty()) throw ConfigError("empty sigma2 grid");
  if (config.trials < 1) throw ConfigError("similarity experiment needs trials >= 1");
  if (lambda <= 0.0) throw ConfigError("similarity experiment needs lambda > 0");

  SweepConfig base = config;
  base.n_hat = config.n;  // the perturbed copy has the same size by construction
  auto [train, test_unused] = load_dataset(base);
  (void)test_unused;

  std::vector<SimilarityRecord> out;
  out.reserve(config.sigma2_grid.size());
  for (std::size_t k = 0; k < config.sigma2_grid.size(); ++k) {
    const double sigma2 = config.sigma2_grid[k];
    DataMatrix noisy = noisy_copy(train, sigma2, derive_seed(config.seed, kNoiseTag + k));
    MonteCarloResult mc = monte_carlo(train, noisy, feature_count, lambda, config.trials,
                                      derive_seed(config.seed, kTrialTag), config.threads);
    SimilarityRecord rec;
    rec.sigma2 = sigma2;
    rec.e_train = mc.mean_train;
    rec.e_train_std = mc.std_train;
    rec.e_test = mc.mean_test;
    rec.e_test_std = mc.std_test;
    rec.crossed = mc.mean_test > 2.0 * mc.mean_train;
    out.push_back(rec);
  }
  return out;
}

std::vector<ExperimentRecord> phase_report(const KernelPair& k,
                                           const std::vector<int>& feature_grid,
                                           const std::vector<double>& lambdas, int threads) {
  const int n = k.rows();
  std::vector<ExperimentRecord> records(feature_grid.size() * lambdas.size());
  parallel_for(static_cast<std::int64_t>(feature_grid.size()), threads, [&](std::int64_t fi) {
    SolveOptions opts;
    bool warm = false;
    std::vector<std::size_t> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
    for (std::size_t li : order) {
      ExperimentRecord& rec = records[fi * lambdas.size() + li];
      rec.n = n;
      rec.feature_count = feature_grid[fi];
      rec.lambda = lambdas[li];
      try {
        if (lambdas[li] == 0.0) {
          GammaSolution g = solve_gamma(k, feature_grid[fi]);
          rec.gamma_cos = g.gamma_cos;
          rec.gamma_sin = g.gamma_sin;
        } else {
          FixedPointSolution fp =
              solve_delta(k, feature_grid[fi], lambdas[li], warm ? opts : SolveOptions{});
          opts.init_cos = fp.delta_cos;
          opts.init_sin = fp.delta_sin;
          warm = true;
          rec.delta_cos = fp.delta_cos;
          rec.delta_sin = fp.delta_sin;
          rec.det_omega_inv = omega(k, fp, feature_grid[fi]).det_omega_inv;
        }
      } catch (const Error& e) {
        rec.error = e.what();
      }
    }
  });
  return records;
}

void write_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kHeader << "\n";
  for (const ExperimentRecord& r : records) {
    out << r.n << ',' << r.p << ',' << r.feature_count << ',' << format_double(r.lambda) << ','
        << field(r.delta_cos) << ',' << field(r.delta_sin) << ',' << field(r.gamma_cos) << ','
        << field(r.gamma_sin) << ',' << field(r.det_omega_inv) << ',' << field(r.e_train_theory)
        << ',' << field(r.e_test_theory) << ',' << field(r.e_train_emp) << ','
        << field(r.e_train_std) << ',' << field(r.e_test_emp) << ',' << field(r.e_test_std) << ','
        << r.trials << ',' << sanitize(r.error) << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

namespace {

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::vector<ExperimentRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV " + path);
  if (line != kHeader) throw DataError("unexpected CSV header in " + path);

  std::vector<ExperimentRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    while (fields.size() < 17) fields.emplace_back();
    ExperimentRecord r;
    r.n = std::stoi(fields[0]);
    r.p = std::stoi(fields[1]);
    r.feature_count = std::stoi(fields[2]);
    r.lambda = std::stod(fields[3]);
    r.delta_cos = parse_optional(fields[4]);
    r.delta_sin = parse_optional(fields[5]);
    r.gamma_cos = parse_optional(fields[6]);
    r.gamma_sin = parse_optional(fields[7]);
    r.det_omega_inv = parse_optional(fields[8]);
    r.e_train_theory = parse_optional(fields[9]);
    r.e_test_theory = parse_optional(fields[10]);
    r.e_train_emp = parse_optional(fields[11]);
    r.e_train_std = parse_optional(fields[12]);
    r.e_test_emp = parse_optional(fields[13]);
    r.e_test_std = parse_optional(fields[14]);
    r.trials = std::stoi(fields[15]);
    r.error = fields[16];
    records.push_back(std::move(r));
  }
  return records;
}

void write_similarity_csv(const std::string& path, const std::vector<SimilarityRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "sigma2,e_train,e_train_std,e_test,e_test_std,crossed\n";
  for (const SimilarityRecord& r : records) {
    out << format_double(r.sigma2) << ',' << format_double(r.e_train) << ','
        << format_double(r.e_train_std) << ',' << format_double(r.e_test) << ','
        << format_double(r.e_test_std) << ',' << (r.crossed ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace rff
