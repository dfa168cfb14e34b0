#include "rff/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "rff/errors.hpp"

namespace rff {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("unparseable number '" + text + "' in " + context);
  }
  if (used != text.size()) throw ConfigError("unparseable number '" + text + "' in " + context);
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  Config config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + " of " + path +
                        " is not a key=value pair");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("empty key on line " + std::to_string(line_no) + " of " + path);
    config.set(key, trim(line.substr(eq + 1)), line_no);
  }
  return config;
}

void Config::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + item + "' is not a key=value pair");
    const std::string key = trim(item.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + item + "' has an empty key");
    set(key, trim(item.substr(eq + 1)), 0);
  }
}

void Config::set(const std::string& key, const std::string& value, int line) {
  entries_[key] = Entry{value, line};
}

const Config::Entry* Config::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void Config::fail(const std::string& key, const std::string& why) const {
  const Entry* e = find(key);
  std::string where = e && e->line > 0 ? " (config line " + std::to_string(e->line) + ")"
                                       : " (command-line override)";
  throw ConfigError("key '" + key + "'" + (e ? where : "") + ": " + why);
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key, const std::string& def) const {
  const Entry* e = find(key);
  return e ? e->value : def;
}

long long Config::get_int(const std::string& key, long long def) const {
  const Entry* e = find(key);
  if (!e) return def;
  try {
    std::size_t used = 0;
    long long v = std::stoll(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + e->value + "'");
  }
}

double Config::get_double(const std::string& key, double def) const {
  const Entry* e = find(key);
  if (!e) return def;
  try {
    return to_double(e->value, "key '" + key + "'");
  } catch (const ConfigError&) {
    fail(key, "expected a number, got '" + e->value + "'");
  }
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t def) const {
  const Entry* e = find(key);
  if (!e) return def;
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(key, "expected an unsigned integer, got '" + e->value + "'");
  }
}

std::vector<double> Config::get_grid(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return {};
  try {
    return parse_grid(e->value);
  } catch (const ConfigError& err) {
    fail(key, err.what());
  }
}

void Config::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, entry] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string where =
          entry.line > 0 ? "config line " + std::to_string(entry.line) : "command-line override";
      throw ConfigError("unknown key '" + key + "' (" + where + ")");
    }
  }
}

std::string Config::resolved() const {
  std::string out;
  for (const auto& [key, entry] : entries_) out += key + "=" + entry.value + "\n";
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw ConfigError("empty grid");
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:stop:count[log]");
    const double start = to_double(trim(parts[0]), "range start");
    const double stop = to_double(trim(parts[1]), "range stop");
    std::string count_text = trim(parts[2]);
    bool log_spaced = false;
    if (count_text.size() > 3 && count_text.substr(count_text.size() - 3) == "log") {
      log_spaced = true;
      count_text = trim(count_text.substr(0, count_text.size() - 3));
    }
    const double count_value = to_double(count_text, "range count");
    const int count = static_cast<int>(count_value);
    if (count < 2 || count != count_value) throw ConfigError("range count must be an integer >= 2");
    if (log_spaced && (start <= 0.0 || stop <= 0.0))
      throw ConfigError("log range needs positive endpoints");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / (count - 1);
      out[i] = log_spaced ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                          : start + t * (stop - start);
    }
    return out;
  }
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    const std::string v = trim(item);
    if (v.empty()) throw ConfigError("empty grid element");
    out.push_back(to_double(v, "grid element"));
  }
  return out;
}

FeatureGridSpec parse_feature_grid(const std::string& text) {
  FeatureGridSpec spec;
  std::string body = text;
  if (body.rfind("ratio:", 0) == 0) {
    spec.ratios = true;
    body = body.substr(6);
  }
  spec.values = parse_grid(body);
  if (!spec.ratios) {
    for (double v : spec.values) {
      if (v != std::floor(v)) {
        spec.ratios = true;
        break;
      }
    }
  }
  return spec;
}

SweepConfig sweep_config_from(const Config& config) {
  SweepConfig out;
  out.images_path = config.get_string("dataset.images", "");
  out.labels_path = config.get_string("dataset.labels", "");
  const std::string kind =
      config.get_string("dataset.kind", out.images_path.empty() ? "synthetic" : "idx");
  if (kind == "idx") out.kind = DatasetKind::idx;
  else if (kind == "synthetic") out.kind = DatasetKind::synthetic;
  else throw ConfigError("dataset.kind must be 'idx' or 'synthetic', got '" + kind + "'");
  if (out.kind == DatasetKind::idx && (out.images_path.empty() || out.labels_path.empty()))
    throw ConfigError("dataset.kind=idx requires dataset.images and dataset.labels");

  if (config.has("classes")) {
    std::vector<double> classes = config.get_grid("classes");
    if (classes.size() != 2 || classes[0] == classes[1])
      throw ConfigError("classes must name two distinct labels, e.g. classes=3,7");
    out.class_a = static_cast<int>(classes[0]);
    out.class_b = static_cast<int>(classes[1]);
  }

  out.n = static_cast<int>(config.get_int("n", out.n));
  out.n_hat = static_cast<int>(config.get_int("n_hat", out.n_hat));
  out.p = static_cast<int>(config.get_int("p", out.p));
  out.separation = config.get_double("separation", out.separation);
  if (out.n < 2 || out.n_hat < 2) throw ConfigError("n and n_hat must be >= 2");
  if (out.p < 1) throw ConfigError("p must be >= 1");

  if (config.has("N")) {
    FeatureGridSpec spec = parse_feature_grid(config.get_string("N", ""));
    for (double v : spec.values) {
      if (v < 0.0) throw ConfigError("N values must be nonnegative");
      if (spec.ratios) out.feature_ratios.push_back(v);
      else out.feature_counts.push_back(static_cast<int>(v));
    }
  }

  for (double l : config.get_grid("lambda")) {
    if (l < 0.0) throw ConfigError("lambda must be nonnegative (0 selects the ridgeless gamma path)");
    out.lambdas.push_back(l);
  }
  out.sigma2_grid = config.get_grid("sigma2");
  for (double s : out.sigma2_grid)
    if (s < 0.0) throw ConfigError("sigma2 must be nonnegative");

  out.trials = static_cast<int>(config.get_int("trials", out.trials));
  if (out.trials < 0) throw ConfigError("trials must be nonnegative");
  out.seed = config.get_seed("seed", out.seed);
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  out.threads = static_cast<int>(config.get_int("threads", hw > 0 ? hw : 1));
  if (out.threads < 1) throw ConfigError("threads must be >= 1");
  out.output_path = config.get_string("out", "");
  return out;
}

std::string describe(const SweepConfig& config) {
  std::ostringstream os;
  os << "dataset.kind=" << (config.kind == DatasetKind::idx ? "idx" : "synthetic");
  if (config.kind == DatasetKind::idx)
    os << " dataset.images=" << config.images_path << " dataset.labels=" << config.labels_path
       << " classes=" << config.class_a << "," << config.class_b;
  else
    os << " separation=" << config.separation;
  os << " n=" << config.n << " n_hat=" << config.n_hat << " p=" << config.p;
  auto list = [&os](const char* name, const auto& values) {
    if (values.empty()) return;
    os << " " << name << "=";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  };
  list("N", config.feature_counts);
  list("N/n", config.feature_ratios);
  list("lambda", config.lambdas);
  list("sigma2", config.sigma2_grid);
  os << " trials=" << config.trials << " seed=" << config.seed << " threads=" << config.threads;
  if (!config.output_path.empty()) os << " out=" << config.output_path;
  return os.str();
}

}  // namespace rff
