#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rff/errors.hpp"

namespace rff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double operator_norm_sym(const Matrix& m);

// Inverse of a symmetric positive definite matrix via Cholesky.
// Throws DegeneracyError if the factorization fails.
Matrix spd_inverse(const Matrix& m, const char* what);

// Solve (m) x = rhs for symmetric positive definite m.
Matrix spd_solve(const Matrix& m, const Matrix& rhs, const char* what);

// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots so the outcome is independent of scheduling.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace rff
