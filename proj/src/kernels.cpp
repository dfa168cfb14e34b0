#include "rff/kernels.hpp"

#include "rff/errors.hpp"

namespace rff {

namespace {

KernelPair components_impl(const Matrix& x, const Matrix& x2, bool symmetric) {
  if (x.rows() != x2.rows()) throw ShapeError("kernel_components: dimension mismatch");
  Vector sq_left = x.colwise().squaredNorm();
  Vector sq_right = x2.colwise().squaredNorm();
  Matrix cross = x.transpose() * x2;  // m x n

  // ||x_i - x_j||^2 and ||x_i + x_j||^2; the difference is clamped at zero so
  // roundoff cannot push the Gaussian term above 1.
  Matrix minus = ((-2.0 * cross).colwise() + sq_left).rowwise() + sq_right.transpose();
  Matrix plus = ((2.0 * cross).colwise() + sq_left).rowwise() + sq_right.transpose();
  minus = minus.cwiseMax(0.0);
  plus = plus.cwiseMax(0.0);

  Matrix e_minus = (-0.5 * minus).array().exp().matrix();
  Matrix e_plus = (-0.5 * plus).array().exp().matrix();

  KernelPair out;
  out.k_cos = 0.5 * (e_minus + e_plus);
  out.k_sin = 0.5 * (e_minus - e_plus);
  out.symmetric = symmetric;
  if (symmetric) {
    out.k_cos = 0.5 * (out.k_cos + out.k_cos.transpose()).eval();
    out.k_sin = 0.5 * (out.k_sin + out.k_sin.transpose()).eval();
  }
  return out;
}

}  // namespace

KernelPair kernel_components(const DataMatrix& x, const DataMatrix& x2) {
  return components_impl(x.x, x2.x, false);
}

KernelPair kernel_components(const DataMatrix& x) {
  return components_impl(x.x, x.x, true);
}

Matrix gaussian_kernel(const DataMatrix& x, const DataMatrix& x2) {
  return kernel_components(x, x2).gaussian();
}

Matrix gaussian_kernel(const DataMatrix& x) {
  return kernel_components(x).gaussian();
}

}  // namespace rff
