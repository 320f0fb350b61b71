#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace fpt {

// Dense row-major matrix; just enough surface for the kernels here.
struct matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  matrix() = default;
  matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static matrix identity(int n) {
    matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

// y = M x. Plain left-to-right accumulation; this is the one shared matvec
// kernel, so results are bitwise comparable across every entry point that
// claims reduction-order equality.
inline void matvec_into(const matrix& m, const double* x, double* y) {
  for (int i = 0; i < m.rows; ++i) {
    const double* row = &m.a[static_cast<std::size_t>(i) * m.cols];
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

inline std::vector<double> matvec(const matrix& m, const std::vector<double>& x) {
  assert(static_cast<int>(x.size()) == m.cols);
  std::vector<double> y(m.rows);
  matvec_into(m, x.data(), y.data());
  return y;
}

// y = M^T x without materializing the transpose; row-major column scan.
inline std::vector<double> matvec_transposed(const matrix& m, const std::vector<double>& x) {
  assert(static_cast<int>(x.size()) == m.rows);
  std::vector<double> y(m.cols, 0.0);
  for (int j = 0; j < m.cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i) acc += m(i, j) * x[i];
    y[j] = acc;
  }
  return y;
}

}  // namespace fpt
