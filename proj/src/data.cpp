#include "rff/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rff/errors.hpp"
#include "rff/rng.hpp"

namespace rff {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("truncated IDX header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<std::uint8_t> read_payload(std::istream& in, std::size_t count, const std::string& path) {
  std::vector<std::uint8_t> bytes(count);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    throw DataError("truncated IDX payload in " + path + " (expected " + std::to_string(count) + " bytes)");
  return bytes;
}

}  // namespace

RawDataset load_idx(const std::string& image_path, const std::string& label_path) {
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + image_path);
  std::ifstream lab(label_path, std::ios::binary);
  if (!lab) throw IoError("cannot open " + label_path);

  if (std::uint32_t magic = read_be32(img, image_path); magic != kImageMagic)
    throw DataError("bad image magic in " + image_path + " (got 0x" + std::to_string(magic) + ")");
  RawDataset out;
  out.count = static_cast<int>(read_be32(img, image_path));
  out.rows = static_cast<int>(read_be32(img, image_path));
  out.cols = static_cast<int>(read_be32(img, image_path));
  if (out.rows <= 0 || out.cols <= 0 || out.count < 0)
    throw DataError("invalid image dimensions in " + image_path);

  if (std::uint32_t magic = read_be32(lab, label_path); magic != kLabelMagic)
    throw DataError("bad label magic in " + label_path + " (got 0x" + std::to_string(magic) + ")");
  const int label_count = static_cast<int>(read_be32(lab, label_path));
  if (label_count != out.count)
    throw DataError("image/label count mismatch: " + std::to_string(out.count) + " images vs " +
                    std::to_string(label_count) + " labels");

  out.images = read_payload(img, static_cast<std::size_t>(out.count) * out.pixels(), image_path);
  out.labels = read_payload(lab, static_cast<std::size_t>(out.count), label_path);
  return out;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      int count, int rows, int cols) {
  if (pixels.size() != static_cast<std::size_t>(count) * rows * cols)
    throw DataError("write_idx_images: payload size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(count));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("failed writing " + path);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_be32(out, kLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!out) throw IoError("failed writing " + path);
}

namespace {

DataMatrix gather(const RawDataset& raw, const std::vector<int>& idx_a, const std::vector<int>& idx_b) {
  const int p = raw.pixels();
  const int n = static_cast<int>(idx_a.size() + idx_b.size());
  DataMatrix out;
  out.x.resize(p, n);
  out.y.resize(n);
  int col = 0;
  for (int i : idx_a) {
    const std::uint8_t* px = raw.image(i);
    for (int k = 0; k < p; ++k) out.x(k, col) = static_cast<double>(px[k]);
    out.y(col++) = -1.0;
  }
  for (int i : idx_b) {
    const std::uint8_t* px = raw.image(i);
    for (int k = 0; k < p; ++k) out.x(k, col) = static_cast<double>(px[k]);
    out.y(col++) = +1.0;
  }
  return out;
}

// Takes `want` balanced across two pools starting at offsets, spilling the
// deficit to the other class when one pool runs short.
std::pair<int, int> balanced_take(int want, int avail_a, int avail_b) {
  int take_a = std::min((want + 1) / 2, avail_a);
  int take_b = std::min(want - take_a, avail_b);
  take_a = std::min(want - take_b, avail_a);  // spill back if b was short
  if (take_a + take_b != want)
    throw DataError("insufficient samples: need " + std::to_string(want) + ", have " +
                    std::to_string(avail_a + avail_b));
  return {take_a, take_b};
}

}  // namespace

std::pair<DataMatrix, DataMatrix> make_binary_split(const RawDataset& raw, const SplitSpec& spec) {
  if (spec.class_a == spec.class_b) throw DataError("split classes must differ");
  if (spec.n_train < 2 || spec.n_test < 2) throw DataError("split sizes must be >= 2");
  if (raw.count != static_cast<int>(raw.labels.size()))
    throw DataError("raw dataset image/label count mismatch");

  std::vector<int> pool_a, pool_b;
  for (int i = 0; i < raw.count; ++i) {
    if (raw.labels[i] == spec.class_a) pool_a.push_back(i);
    else if (raw.labels[i] == spec.class_b) pool_b.push_back(i);
  }
  auto rng = make_rng(spec.seed);
  std::shuffle(pool_a.begin(), pool_a.end(), rng);
  std::shuffle(pool_b.begin(), pool_b.end(), rng);

  auto [train_a, train_b] = balanced_take(spec.n_train, static_cast<int>(pool_a.size()),
                                          static_cast<int>(pool_b.size()));
  auto [test_a, test_b] = balanced_take(spec.n_test, static_cast<int>(pool_a.size()) - train_a,
                                        static_cast<int>(pool_b.size()) - train_b);

  std::vector<int> idx_train_a(pool_a.begin(), pool_a.begin() + train_a);
  std::vector<int> idx_train_b(pool_b.begin(), pool_b.begin() + train_b);
  std::vector<int> idx_test_a(pool_a.begin() + train_a, pool_a.begin() + train_a + test_a);
  std::vector<int> idx_test_b(pool_b.begin() + train_b, pool_b.begin() + train_b + test_b);
  return {gather(raw, idx_train_a, idx_train_b), gather(raw, idx_test_a, idx_test_b)};
}

namespace {

// Duplicate columns within one dataset break positive definiteness of its
// kernel matrix, so they are rejected at distance 1e-12. (The test set may
// coincide with the training set; only within-matrix duplicates matter.)
// Columns are sorted by norm first; only norm-adjacent candidates need the
// full distance.
void reject_duplicate_columns(const Matrix& pool) {
  const int n = static_cast<int>(pool.cols());
  constexpr double tol = 1e-12;
  std::vector<double> norms(n);
  for (int i = 0; i < n; ++i) norms[i] = pool.col(i).norm();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return norms[a] < norms[b]; });
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n && norms[order[j]] - norms[order[i]] <= tol; ++j) {
      if ((pool.col(order[i]) - pool.col(order[j])).norm() <= tol)
        throw DataError("duplicate columns " + std::to_string(order[i]) + " and " +
                        std::to_string(order[j]) + " in data pool");
    }
  }
}

}  // namespace

std::pair<DataMatrix, DataMatrix> normalize_joint(const DataMatrix& train, const DataMatrix& test) {
  if (train.p() != test.p()) throw ShapeError("normalize_joint: dimension mismatch");
  const int n = train.n(), n_hat = test.n();
  const double pool_size = n + n_hat;

  Vector mean = (train.x.rowwise().sum() + test.x.rowwise().sum()) / pool_size;
  DataMatrix out_train{train.x.colwise() - mean, train.y};
  DataMatrix out_test{test.x.colwise() - mean, test.y};

  const double tau = (out_train.x.squaredNorm() + out_test.x.squaredNorm()) / pool_size;
  if (tau <= 0.0) throw DataError("degenerate data pool: all columns equal after centering");
  const double scale = 1.0 / std::sqrt(tau);
  out_train.x *= scale;
  out_test.x *= scale;

  reject_duplicate_columns(out_train.x);
  reject_duplicate_columns(out_test.x);
  return {std::move(out_train), std::move(out_test)};
}

DataMatrix synthetic_gaussian(int n, int p, std::uint64_t seed) {
  return synthetic_gaussian(n, p, Vector::Ones(p), seed);
}

DataMatrix synthetic_gaussian(int n, int p, const Vector& diagonal_spectrum, std::uint64_t seed) {
  if (n < 1 || p < 1) throw DataError("synthetic_gaussian: n and p must be >= 1");
  if (diagonal_spectrum.size() != p) throw ShapeError("synthetic_gaussian: spectrum size != p");
  auto rng = make_rng(seed);
  DataMatrix out;
  out.x.resize(p, n);
  fill_gaussian(out.x, rng);
  out.x = diagonal_spectrum.cwiseSqrt().asDiagonal() * out.x;
  out.y.resize(n);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i) out.y(i) = coin(rng) ? 1.0 : -1.0;
  return out;
}

std::pair<DataMatrix, DataMatrix> synthetic_two_class(int n_train, int n_test, int p,
                                                      double separation, std::uint64_t seed) {
  if (n_train < 2 || n_test < 2) throw DataError("synthetic_two_class: sizes must be >= 2");
  auto rng = make_rng(seed);
  Vector mu = Vector::Constant(p, separation / std::sqrt(static_cast<double>(p)));
  auto draw = [&](int count) {
    DataMatrix d;
    d.x.resize(p, count);
    fill_gaussian(d.x, rng);
    d.y.resize(count);
    for (int i = 0; i < count; ++i) {
      d.y(i) = (i % 2 == 0) ? -1.0 : 1.0;
      d.x.col(i) += d.y(i) * mu;
    }
    return d;
  };
  DataMatrix train = draw(n_train);
  DataMatrix test = draw(n_test);
  return normalize_joint(train, test);
}

DataMatrix noisy_copy(const DataMatrix& base, double sigma2, std::uint64_t seed) {
  if (sigma2 < 0.0) throw DataError("noisy_copy: sigma2 must be nonnegative");
  DataMatrix out{base.x, base.y};
  if (sigma2 == 0.0) return out;
  auto rng = make_rng(seed);
  Matrix noise(base.p(), base.n());
  fill_gaussian(noise, rng, 1.0 / std::sqrt(static_cast<double>(base.p())));
  out.x += std::sqrt(sigma2) * noise;
  return out;
}

}  // namespace rff
