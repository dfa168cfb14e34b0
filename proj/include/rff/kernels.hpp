#pragma once

#include "rff/data.hpp"
#include "rff/linalg.hpp"

namespace rff {

// The two limiting kernel components of the random Fourier feature map.
// k_cos + k_sin is the Gaussian kernel exp(-||x_i - x_j'||^2 / 2).
struct KernelPair {
  Matrix k_cos;  // m x n
  Matrix k_sin;  // m x n
  bool symmetric = false;

  int rows() const { return static_cast<int>(k_cos.rows()); }
  int cols() const { return static_cast<int>(k_cos.cols()); }
  Matrix gaussian() const { return k_cos + k_sin; }
};

// Entries are evaluated through the overflow-safe identity
//   k_cos = (e^{-d-^2/2} + e^{-d+^2/2}) / 2,  k_sin = (e^{-d-^2/2} - e^{-d+^2/2}) / 2,
// with d-/d+ the Euclidean distance/anti-distance, which is algebraically
// equal to e^{-(|x|^2+|x'|^2)/2} cosh/sinh(x^T x') without the cosh blowup.
KernelPair kernel_components(const DataMatrix& x, const DataMatrix& x2);

// Symmetric case: result is symmetrized as (A + A^T)/2.
KernelPair kernel_components(const DataMatrix& x);

// Gaussian kernel matrix, identical to k_cos + k_sin entrywise.
Matrix gaussian_kernel(const DataMatrix& x, const DataMatrix& x2);
Matrix gaussian_kernel(const DataMatrix& x);

}  // namespace rff
