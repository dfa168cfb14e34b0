#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rff/experiments.hpp"

namespace rff {

// Flat key=value configuration: optional plain-text file ('#' comments),
// then override strings applied last. Values can be scalars, comma lists,
// or "start:stop:count" / "start:stop:countlog" ranges.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);

  void apply_overrides(const std::vector<std::string>& overrides);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  long long get_int(const std::string& key, long long def) const;
  double get_double(const std::string& key, double def) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
  std::vector<double> get_grid(const std::string& key) const;  // empty if absent

  // Rejects any key outside `allowed`, naming the key and source line.
  void require_known(const std::vector<std::string>& allowed) const;

  // "key=value" lines in key order, for the resolved-config banner.
  std::string resolved() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;  // 0 means command-line override
  };
  void set(const std::string& key, const std::string& value, int line);
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  std::map<std::string, Entry> entries_;
};

// "a,b,c" lists and "start:stop:count[log]" ranges; single scalars yield a
// one-element grid.
std::vector<double> parse_grid(const std::string& text);

// Feature grid values: integers are counts; any fractional value (or a
// "ratio:" prefix) marks the whole grid as N/n ratios.
struct FeatureGridSpec {
  std::vector<double> values;
  bool ratios = false;
};
FeatureGridSpec parse_feature_grid(const std::string& text);

// Shared dataset/sweep keys -> SweepConfig (grids filled where present).
SweepConfig sweep_config_from(const Config& config);

// One-line rendering of the effective sweep parameters.
std::string describe(const SweepConfig& config);

}  // namespace rff
