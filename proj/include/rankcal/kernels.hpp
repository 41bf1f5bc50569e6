#pragma once

// Dense matrix products used by the classifier. Each product has a serial
// reference implementation and an OpenMP implementation. Both accumulate every
// output element over the shared dimension in ascending order, so their
// results are bit-identical regardless of thread count.

#include "rankcal/numcore.hpp"

namespace rankcal::kernels {

enum class Exec { serial, parallel };

namespace serial {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);       // a * b
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);  // a^T * b
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);  // a * b^T
}  // namespace serial

namespace parallel {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
}  // namespace parallel

inline void matmul(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  exec == Exec::serial ? serial::matmul(a, b, out) : parallel::matmul(a, b, out);
}
inline void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  exec == Exec::serial ? serial::matmul_at_b(a, b, out) : parallel::matmul_at_b(a, b, out);
}
inline void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  exec == Exec::serial ? serial::matmul_a_bt(a, b, out) : parallel::matmul_a_bt(a, b, out);
}

// Shape checks shared by both implementations; throw InvalidInput.
void check_matmul(const Matrix& a, const Matrix& b);
void check_matmul_at_b(const Matrix& a, const Matrix& b);
void check_matmul_a_bt(const Matrix& a, const Matrix& b);

}  // namespace rankcal::kernels
