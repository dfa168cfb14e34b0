#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rff/config.hpp"
#include "rff/errors.hpp"

using namespace rff;

namespace {

std::string write_config(const char* name, const char* body) {
  std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("grid parsing") {
  SUBCASE("comma list") {
    auto g = parse_grid("250,500,1000");
    REQUIRE(g.size() == 3);
    CHECK(g[1] == 500.0);
  }
  SUBCASE("linear range") {
    auto g = parse_grid("0:1:5");
    REQUIRE(g.size() == 5);
    CHECK(g[2] == doctest::Approx(0.5));
    CHECK(g[4] == 1.0);
  }
  SUBCASE("log range") {
    auto g = parse_grid("1e-4:1e2:13log");
    REQUIRE(g.size() == 13);
    CHECK(g.front() == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(g.back() == doctest::Approx(1e2).epsilon(1e-12));
    CHECK(g[6] == doctest::Approx(1e-1).epsilon(1e-10));  // geometric midpoint
  }
  SUBCASE("scalar") {
    auto g = parse_grid("0.25");
    REQUIRE(g.size() == 1);
    CHECK(g[0] == 0.25);
  }
  SUBCASE("malformed ranges") {
    CHECK_THROWS_AS(parse_grid("1:2"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:2:1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("-1:2:4log"), ConfigError);
    CHECK_THROWS_AS(parse_grid("a,b"), ConfigError);
    CHECK_THROWS_AS(parse_grid(""), ConfigError);
  }
}

TEST_CASE("feature grids: integers are counts, fractions or prefix are ratios") {
  CHECK_FALSE(parse_feature_grid("250,500,1000").ratios);
  CHECK(parse_feature_grid("0.05:5:21log").ratios);
  CHECK(parse_feature_grid("0.25,2").ratios);
  CHECK(parse_feature_grid("ratio:1,2,4").ratios);
}

TEST_CASE("config file parsing with overrides") {
  std::string path = write_config("rff_cfg_basic.cfg",
                                  "# sweep setup\n"
                                  "n = 120\n"
                                  "lambda = 1e-3,1 # trailing comment\n"
                                  "seed=9\n");
  Config config = Config::from_file(path);
  config.apply_overrides({"n=200", "out=run.csv"});
  CHECK(config.get_int("n", 0) == 200);  // override wins
  CHECK(config.get_seed("seed", 0) == 9);
  CHECK(config.get_grid("lambda").size() == 2);
  CHECK(config.get_string("out", "") == "run.csv");
  CHECK(config.get_string("absent", "fallback") == "fallback");

  std::string resolved = config.resolved();
  CHECK(resolved.find("n=200") != std::string::npos);
  CHECK(resolved.find("lambda=1e-3,1") != std::string::npos);
}

TEST_CASE("configuration errors name the key and the line") {
  std::string path = write_config("rff_cfg_bad.cfg", "n = 10\n\nlambda = banana\n");
  Config config = Config::from_file(path);
  try {
    (void)config.get_grid("lambda");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("lambda") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);  // line number
  }
  CHECK_THROWS_AS(config.require_known({"lambda"}), ConfigError);  // 'n' unknown
  CHECK_THROWS_AS(Config::from_file(write_config("rff_cfg_eq.cfg", "no_equals_here\n")),
                  ConfigError);
  CHECK_THROWS_AS(Config::from_file("/nonexistent.cfg"), IoError);
  Config empty;
  CHECK_THROWS_AS(empty.apply_overrides({"novalue"}), ConfigError);
}

TEST_CASE("sweep config assembly") {
  SUBCASE("empty file plus full overrides is a valid config") {
    Config config;
    config.apply_overrides({"n=100", "n_hat=50", "p=30", "N=ratio:0.5,1", "lambda=1e-2:1:4log",
                            "trials=3", "seed=5", "threads=2"});
    SweepConfig sc = sweep_config_from(config);
    CHECK(sc.kind == DatasetKind::synthetic);
    CHECK(sc.n == 100);
    CHECK(sc.feature_ratios.size() == 2);
    CHECK(sc.lambdas.size() == 4);
    CHECK(sc.trials == 3);
    CHECK(resolve_feature_grid(sc) == std::vector<int>{50, 100});
  }
  SUBCASE("negative lambda rejected with the positivity rule") {
    Config config;
    config.apply_overrides({"lambda=-1"});
    CHECK_THROWS_AS(sweep_config_from(config), ConfigError);
  }
  SUBCASE("idx kind requires both paths") {
    Config config;
    config.apply_overrides({"dataset.kind=idx"});
    CHECK_THROWS_AS(sweep_config_from(config), ConfigError);
  }
  SUBCASE("classes must be two distinct labels") {
    Config config;
    config.apply_overrides({"classes=3,3"});
    CHECK_THROWS_AS(sweep_config_from(config), ConfigError);
  }
  SUBCASE("fixture file equals the hand-built expectation") {
    std::string path = write_config("rff_cfg_sweep.cfg",
                                    "dataset.kind = synthetic\n"
                                    "classes = 3,7\n"
                                    "n = 300\n"
                                    "n_hat = 150\n"
                                    "p = 80\n"
                                    "N = 75,150\n"
                                    "lambda = 0.5\n"
                                    "trials = 2\n"
                                    "seed = 11\n"
                                    "threads = 1\n"
                                    "out = fixture.csv\n");
    SweepConfig sc = sweep_config_from(Config::from_file(path));
    CHECK(sc.n == 300);
    CHECK(sc.n_hat == 150);
    CHECK(sc.p == 80);
    CHECK(sc.feature_counts == std::vector<int>{75, 150});
    CHECK(sc.lambdas == std::vector<double>{0.5});
    CHECK(sc.trials == 2);
    CHECK(sc.seed == 11);
    CHECK(sc.threads == 1);
    CHECK(sc.output_path == "fixture.csv");
  }
}
