#include "rff/linalg.hpp"

#include <atomic>
#include <exception>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace rff {

double operator_norm_sym(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("operator_norm_sym: matrix not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

Matrix spd_inverse(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError(std::string(what) + ": Cholesky factorization failed (matrix not positive definite)");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

Matrix spd_solve(const Matrix& m, const Matrix& rhs, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError(std::string(what) + ": Cholesky factorization failed (matrix not positive definite)");
  return llt.solve(rhs);
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int n_workers = static_cast<int>(std::min<std::int64_t>(threads, count));
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rff
