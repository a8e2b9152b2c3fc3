#include "tucker/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tucker {

namespace detail {

// Pairwise reduction keeps the rounding error of long sums near
// O(log n) ulps instead of O(n), which matters for norm-based
// truncation decisions on large buffers.
double sum_of_squares(const double* p, std::size_t n) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return sum_of_squares(p, half) + sum_of_squares(p + half, n - half);
}

}  // namespace detail

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b, bool transpose_a,
                bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb) throw std::invalid_argument("multiply: inner dimension mismatch");

  Matrix c(m, n);
  if (m == 0 || n == 0 || k == 0) return c;

  if (!transpose_a && !transpose_b) {
    for (std::size_t j = 0; j < n; ++j) {
      double* cj = c.col(j);
      for (std::size_t l = 0; l < k; ++l) {
        const double blj = b(l, j);
        if (blj == 0.0) continue;
        const double* al = a.col(l);
        for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * blj;
      }
    }
  } else if (transpose_a && !transpose_b) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.col(j);
      double* cj = c.col(j);
      for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.col(i);
        double s = 0.0;
        for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
        cj[i] = s;
      }
    }
  } else if (!transpose_a && transpose_b) {
    for (std::size_t l = 0; l < k; ++l) {
      const double* al = a.col(l);
      for (std::size_t j = 0; j < n; ++j) {
        const double bjl = b(j, l);
        if (bjl == 0.0) continue;
        double* cj = c.col(j);
        for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * bjl;
      }
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      double* cj = c.col(j);
      for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.col(i);
        double s = 0.0;
        for (std::size_t l = 0; l < k; ++l) s += ai[l] * b(j, l);
        cj[i] = s;
      }
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double* mj = m.col(j);
    for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = mj[i];
  }
  return t;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.empty() && a.rows() == 0) {
    Matrix c = b;
    return c;
  }
  if (b.empty() && b.rows() == 0) {
    Matrix c = a;
    return c;
  }
  if (a.rows() != b.rows())
    throw std::invalid_argument("hcat: row count mismatch");
  Matrix c(a.rows(), a.cols() + b.cols());
  std::copy(a.data(), a.data() + a.size(), c.data());
  std::copy(b.data(), b.data() + b.size(), c.data() + a.size());
  return c;
}

double frobenius_norm(const Matrix& m) {
  return std::sqrt(detail::sum_of_squares(m.data(), m.size()));
}

double orthonormality_defect(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double* cj = m.col(j);
    for (std::size_t i = 0; i <= j; ++i) {
      const double* ci = m.col(i);
      double dot = 0.0;
      for (std::size_t l = 0; l < m.rows(); ++l) dot += ci[l] * cj[l];
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(dot - target));
    }
  }
  return worst;
}

}  // namespace tucker
