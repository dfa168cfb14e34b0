#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rff/linalg.hpp"

namespace rff {

// Raw grayscale image set as stored in IDX files.
struct RawDataset {
  std::vector<std::uint8_t> images;  // count * rows * cols, row-major
  std::vector<std::uint8_t> labels;  // count
  int count = 0;
  int rows = 0;
  int cols = 0;

  int pixels() const { return rows * cols; }
  const std::uint8_t* image(int i) const { return images.data() + static_cast<std::size_t>(i) * pixels(); }
};

// Column-major sample collection: X is p x n, one sample per column.
// y holds -1/+1 targets for classification tasks.
struct DataMatrix {
  Matrix x;
  Vector y;

  int p() const { return static_cast<int>(x.rows()); }
  int n() const { return static_cast<int>(x.cols()); }
};

struct SplitSpec {
  int class_a = 3;  // mapped to -1
  int class_b = 7;  // mapped to +1
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 0;
};

// IDX container I/O (big-endian headers, magic 0x803 for images, 0x801 for
// labels). Wrong magic -> DataError; truncated payload -> DataError;
// image/label count mismatch -> DataError.
RawDataset load_idx(const std::string& image_path, const std::string& label_path);
void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      int count, int rows, int cols);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Seeded deterministic two-class split; classes balanced where counts allow,
// train and test disjoint. Throws DataError if the pool is too small.
std::pair<DataMatrix, DataMatrix> make_binary_split(const RawDataset& raw, const SplitSpec& spec);

// Joint centering and scaling of a train/test pair: one mean vector over the
// concatenated columns, then a single global factor so the mean squared
// column norm over the pool equals 1. Rejects constant pools and duplicate
// columns (pairwise distance <= 1e-12).
std::pair<DataMatrix, DataMatrix> normalize_joint(const DataMatrix& train, const DataMatrix& test);

// n i.i.d. N(0, C) columns, C = I_p or diag(spectrum). Targets are random
// -1/+1 draws from the same seed so fixtures are regression-ready.
DataMatrix synthetic_gaussian(int n, int p, std::uint64_t seed);
DataMatrix synthetic_gaussian(int n, int p, const Vector& diagonal_spectrum, std::uint64_t seed);

// Two-class Gaussian mixture surrogate: x = y * mu + z with z ~ N(0, I_p),
// ||mu|| = separation, y = -1/+1 balanced. Returned pair is jointly
// normalized and ready for the kernel stage.
std::pair<DataMatrix, DataMatrix> synthetic_two_class(int n_train, int n_test, int p,
                                                      double separation, std::uint64_t seed);

// X_hat = X + sigma * E with E i.i.d. N(0, 1/p); labels copied unchanged.
DataMatrix noisy_copy(const DataMatrix& base, double sigma2, std::uint64_t seed);

}  // namespace rff
