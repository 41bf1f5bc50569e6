#include <cstdint>

#include "rankcal/kernels.hpp"

namespace rankcal::kernels::parallel {

namespace {
// Below this many multiply-adds the thread team costs more than it saves.
constexpr std::size_t kMinParallelWork = 1 << 14;
}

// Rows of the output are independent; within a row the k loop is outermost
// so the j loop streams through contiguous memory, while each out(i, j) still
// sees its terms in ascending k.
void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul(a, b);
  out = Matrix(a.rows(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t cols = b.cols();
  const bool big = a.rows() * inner * cols >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < rows; ++i) {
    auto dst = out.row(static_cast<std::size_t>(i));
    auto src = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = src[k];
      auto brow = b.row(k);
      for (std::size_t j = 0; j < cols; ++j) dst[j] += aik * brow[j];
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_at_b(a, b);
  out = Matrix(a.cols(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.cols());
  const std::size_t inner = a.rows();
  const std::size_t cols = b.cols();
  const bool big = a.cols() * inner * cols >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < rows; ++i) {
    auto dst = out.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = a(k, static_cast<std::size_t>(i));
      if (aki == 0.0) continue;  // sparse after the rectifier; adding 0*x is exact
      auto brow = b.row(k);
      for (std::size_t j = 0; j < cols; ++j) dst[j] += aki * brow[j];
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_matmul_a_bt(a, b);
  out = Matrix(a.rows(), b.rows());
  const auto rows = static_cast<std::int64_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t cols = b.rows();
  const bool big = a.rows() * inner * cols >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::int64_t i = 0; i < rows; ++i) {
    auto src = a.row(static_cast<std::size_t>(i));
    auto dst = out.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < cols; ++j) {
      auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += src[k] * brow[k];
      dst[j] = acc;
    }
  }
}

}  // namespace rankcal::kernels::parallel
