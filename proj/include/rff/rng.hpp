#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rff {

// splitmix64 step; also used as the counter construction that expands a
// master seed into independent per-trial seeds (seeds may be consumed in
// any order, so trials can run in parallel with identical results).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

inline void fill_gaussian(Eigen::Ref<Eigen::MatrixXd> m, std::mt19937_64& rng,
                          double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
}

}  // namespace rff
