// Command-line front end: every subcommand reads an optional key=value
// config file plus key=value overrides, prints the resolved configuration,
// and writes CSV artifacts. All randomness flows from the single `seed` key.
//
// Exit codes: 0 success, 1 configuration, 2 data, 3 numerical, 4 I/O.

#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rff/config.hpp"
#include "rff/data.hpp"
#include "rff/empirical.hpp"
#include "rff/errors.hpp"
#include "rff/experiments.hpp"
#include "rff/kernels.hpp"
#include "rff/mp.hpp"
#include "rff/rng.hpp"
#include "rff/theory.hpp"

namespace {

using namespace rff;

const std::vector<std::string> kDatasetKeys = {
    "dataset.images", "dataset.labels", "dataset.kind", "classes", "n", "n_hat",
    "p", "separation", "seed", "threads", "out"};

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& more) {
  base.insert(base.end(), more.begin(), more.end());
  return base;
}

Config make_config(const std::string& path, const std::vector<std::string>& overrides) {
  Config config = path.empty() ? Config() : Config::from_file(path);
  config.apply_overrides(overrides);
  return config;
}

void banner(const std::string& name, const std::string& resolved) {
  std::printf("[%s] resolved config: %s\n", name.c_str(), resolved.c_str());
}

std::string default_out(const SweepConfig& config, const std::string& fallback) {
  return config.output_path.empty() ? fallback : config.output_path;
}

std::FILE* open_out(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path + " for writing");
  return f;
}

int cmd_mp_demo(const Config& config) {
  config.require_known({"p", "n", "bins", "lambda", "trials", "seed", "threads", "out"});
  const int p = static_cast<int>(config.get_int("p", 512));
  const int n = static_cast<int>(config.get_int("n", 100 * p));
  const int bins = static_cast<int>(config.get_int("bins", 60));
  const int trials = static_cast<int>(config.get_int("trials", 50));
  const std::uint64_t seed = config.get_seed("seed", 42);
  const int threads = static_cast<int>(config.get_int("threads", 2));
  const std::string out = config.get_string("out", "mp_demo.csv");
  std::vector<double> lambdas = config.get_grid("lambda");
  if (lambdas.empty()) lambdas = parse_grid("0.01:0.5:25");
  std::printf("[mp-demo] resolved config: p=%d n=%d bins=%d trials=%d seed=%llu threads=%d out=%s\n",
              p, n, bins, trials, static_cast<unsigned long long>(seed), threads, out.c_str());

  EigHistogram h = eig_histogram(n, p, bins, derive_seed(seed, 1));
  std::FILE* f = open_out(out);
  std::fprintf(f, "eigenvalue,histogram_density,mp_density\n");
  for (std::size_t i = 0; i < h.centers.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", h.centers[i], h.density[i], h.overlay[i]);
  std::fclose(f);

  const std::string quad_out = out + ".quadform.csv";
  f = open_out(quad_out);
  std::fprintf(f, "lambda,empirical,rmt,population\n");
  Vector a = Vector::Zero(p);
  a(0) = 1.0;  // any deterministic unit vector; C = I makes the choice immaterial
  for (double lam : lambdas) {
    QuadformResult q = sample_cov_quadform(a, n, lam, trials, derive_seed(seed, 2), threads);
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", lam, q.empirical, q.rmt, q.population);
  }
  std::fclose(f);

  const double gap = sample_cov_norm_gap(n, p, std::min(trials, 20), derive_seed(seed, 3), threads);
  std::printf("[mp-demo] mean operator norm |C_hat - I| = %.4f over %d trials (p/n = %.4g)\n", gap,
              std::min(trials, 20), static_cast<double>(p) / n);
  std::printf("[mp-demo] wrote %s and %s\n", out.c_str(), quad_out.c_str());
  return 0;
}

int cmd_kernel(const Config& config) {
  config.require_known(kDatasetKeys);
  SweepConfig sc = sweep_config_from(config);
  banner("kernel", describe(sc));
  auto [train, test] = load_dataset(sc);
  KernelPair k = kernel_components(train);
  KernelPair cross = kernel_components(test, train);
  const std::string out = default_out(sc, "kernel.csv");
  std::FILE* f = open_out(out);
  std::fprintf(f, "block,i,j,k_cos,k_sin,gaussian\n");
  auto dump = [&](const char* name, const KernelPair& kp) {
    for (int i = 0; i < kp.rows(); ++i)
      for (int j = 0; j < kp.cols(); ++j)
        std::fprintf(f, "%s,%d,%d,%.17g,%.17g,%.17g\n", name, i, j, kp.k_cos(i, j), kp.k_sin(i, j),
                     kp.k_cos(i, j) + kp.k_sin(i, j));
  };
  dump("train", k);
  dump("cross", cross);
  std::fclose(f);
  std::printf("[kernel] wrote %s\n", out.c_str());
  return 0;
}

int cmd_fixed_point(const Config& config) {
  config.require_known(with(kDatasetKeys, {"N", "lambda"}));
  SweepConfig sc = sweep_config_from(config);
  banner("fixed-point", describe(sc));
  if (sc.lambdas.size() != 1) throw ConfigError("fixed-point needs exactly one lambda");
  std::vector<int> features = resolve_feature_grid(sc);
  if (features.size() != 1) throw ConfigError("fixed-point needs exactly one N");
  auto [train, test] = load_dataset(sc);
  (void)test;
  KernelPair k = kernel_components(train);
  const double lambda = sc.lambdas.front();
  const int feature_count = features.front();
  if (lambda == 0.0) {
    GammaSolution g = solve_gamma(k, feature_count);
    std::printf("[fixed-point] regime=%s gamma_cos=%.17g gamma_sin=%.17g iterations=%d residual=%.3g\n",
                g.regime == Regime::under ? "under" : "over", g.gamma_cos, g.gamma_sin,
                g.iterations, g.residual);
  } else {
    FixedPointSolution fp = solve_delta(k, feature_count, lambda);
    OmegaResult om = omega(k, fp, feature_count);
    std::printf("[fixed-point] delta_cos=%.17g delta_sin=%.17g det_omega_inv=%.17g iterations=%d residual=%.3g\n",
                fp.delta_cos, fp.delta_sin, om.det_omega_inv, fp.iterations, fp.residual);
  }
  return 0;
}

// predict: theory only; simulate: requires trials; sweep: both as configured
int cmd_sweep_like(const Config& config, const char* name, int trials_mode) {
  config.require_known(with(kDatasetKeys, {"N", "lambda", "trials"}));
  SweepConfig sc = sweep_config_from(config);
  if (trials_mode == 0) sc.trials = 0;
  if (trials_mode > 0 && sc.trials < 1)
    throw ConfigError(std::string(name) + " needs trials >= 1");
  banner(name, describe(sc));
  sc.output_path = default_out(sc, std::string(name) + ".csv");
  std::vector<ExperimentRecord> records = run_sweep(sc);
  int failed = 0;
  for (const ExperimentRecord& r : records)
    if (!r.error.empty()) ++failed;
  std::printf("[%s] %zu cells (%d failed), wrote %s\n", name, records.size(), failed,
              sc.output_path.c_str());
  return 0;
}

int cmd_phase(const Config& config) {
  config.require_known(with(kDatasetKeys, {"N", "lambda"}));
  SweepConfig sc = sweep_config_from(config);
  banner("phase", describe(sc));
  auto [train, test] = load_dataset(sc);
  (void)test;
  KernelPair k = kernel_components(train);
  std::vector<ExperimentRecord> records =
      phase_report(k, resolve_feature_grid(sc), sc.lambdas, sc.threads);
  for (ExperimentRecord& r : records) r.p = train.p();
  const std::string out = default_out(sc, "phase.csv");
  write_csv(out, records);
  std::printf("[phase] %zu cells, wrote %s\n", records.size(), out.c_str());
  return 0;
}

int cmd_lambda_opt(const Config& config) {
  config.require_known(with(kDatasetKeys, {"N", "lambda"}));
  SweepConfig sc = sweep_config_from(config);
  banner("lambda-opt", describe(sc));
  LambdaOptResult result = find_lambda_opt(sc);
  const std::string out = default_out(sc, "lambda_opt.csv");
  write_csv(out, result.profile);
  std::printf("[lambda-opt] lambda_opt=%.17g e_test=%.17g%s, profile in %s\n", result.lambda_opt,
              result.e_test, result.boundary ? " (grid boundary)" : "", out.c_str());
  return 0;
}

int cmd_similarity(const Config& config) {
  config.require_known(with(kDatasetKeys, {"N", "lambda", "sigma2", "trials"}));
  SweepConfig sc = sweep_config_from(config);
  banner("similarity", describe(sc));
  if (sc.lambdas.size() != 1) throw ConfigError("similarity needs exactly one lambda");
  std::vector<SimilarityRecord> records = similarity_threshold_experiment(sc, sc.lambdas.front());
  const std::string out = default_out(sc, "similarity.csv");
  write_similarity_csv(out, records);
  std::printf("[similarity] %zu noise levels, wrote %s\n", records.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic predictions and simulation for random Fourier feature ridge regression"};
  app.require_subcommand(1);

  struct SubArgs {
    std::string config_path;
    std::vector<std::string> overrides;
  };
  auto add_sub = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto args = std::make_shared<SubArgs>();
    sub->add_option("-c,--config", args->config_path, "key=value config file ('#' comments)");
    sub->add_option("overrides", args->overrides, "key=value overrides applied after the file");
    return std::pair{sub, args};
  };

  auto [mp_demo, mp_args] = add_sub("mp-demo", "Sample-covariance eigenvalue histogram and resolvent quadratic forms");
  auto [kernel, kernel_args] = add_sub("kernel", "Write the kernel component matrices of a dataset pair");
  auto [fixed_point, fp_args] = add_sub("fixed-point", "Solve the deterministic-equivalent fixed point (or its ridgeless limit)");
  auto [predict, predict_args] = add_sub("predict", "Theory train/test MSE over an (N, lambda) grid");
  auto [simulate, simulate_args] = add_sub("simulate", "Monte-Carlo train/test MSE over an (N, lambda) grid");
  auto [sweep, sweep_args] = add_sub("sweep", "Theory plus Monte-Carlo over an (N, lambda) grid");
  auto [phase, phase_args] = add_sub("phase", "delta / gamma / det(Omega^-1) across the interpolation threshold");
  auto [lambda_opt, lo_args] = add_sub("lambda-opt", "Grid search of the theory test error over lambda");
  auto [similarity, sim_args] = add_sub("similarity", "Train/test MSE as the test set drifts from the training set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (mp_demo->parsed()) return cmd_mp_demo(make_config(mp_args->config_path, mp_args->overrides));
    if (kernel->parsed()) return cmd_kernel(make_config(kernel_args->config_path, kernel_args->overrides));
    if (fixed_point->parsed()) return cmd_fixed_point(make_config(fp_args->config_path, fp_args->overrides));
    if (predict->parsed()) return cmd_sweep_like(make_config(predict_args->config_path, predict_args->overrides), "predict", 0);
    if (simulate->parsed()) return cmd_sweep_like(make_config(simulate_args->config_path, simulate_args->overrides), "simulate", 1);
    if (sweep->parsed()) return cmd_sweep_like(make_config(sweep_args->config_path, sweep_args->overrides), "sweep", -1);
    if (phase->parsed()) return cmd_phase(make_config(phase_args->config_path, phase_args->overrides));
    if (lambda_opt->parsed()) return cmd_lambda_opt(make_config(lo_args->config_path, lo_args->overrides));
    if (similarity->parsed()) return cmd_similarity(make_config(sim_args->config_path, sim_args->overrides));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
