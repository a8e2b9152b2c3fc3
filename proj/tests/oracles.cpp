#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oracle {

using tucker::DenseTensor;
using tucker::Matrix;

Matrix matmul(const Matrix& a, const Matrix& b, bool transpose_a,
              bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t k2 = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (k != k2) throw std::invalid_argument("oracle matmul: shape mismatch");
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double av = transpose_a ? a(l, i) : a(i, l);
        const double bv = transpose_b ? b(j, l) : b(l, j);
        s += av * bv;
      }
      out(i, j) = s;
    }
  return out;
}

Matrix unfold_by_enumeration(const DenseTensor& t, std::size_t mode) {
  const auto& dims = t.dims();
  const std::size_t d = dims.size();
  const std::size_t n_mode = dims[mode];
  const std::size_t cols = t.size() / n_mode;
  Matrix out(n_mode, cols);

  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    // flat -> multi-index (mode 0 fastest).
    std::size_t rest = flat;
    for (std::size_t k = 0; k < d; ++k) {
      idx[k] = rest % dims[k];
      rest /= dims[k];
    }
    // Column: colexicographic index over all modes except `mode`.
    std::size_t col = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < d; ++k) {
      if (k == mode) continue;
      col += idx[k] * stride;
      stride *= dims[k];
    }
    out(idx[mode], col) = t[flat];
  }
  return out;
}

DenseTensor ttm_by_enumeration(const DenseTensor& t, std::size_t mode,
                               const Matrix& a, bool transpose_a) {
  const std::size_t produced = transpose_a ? a.cols() : a.rows();
  const std::size_t contracted = transpose_a ? a.rows() : a.cols();
  if (contracted != t.dim(mode))
    throw std::invalid_argument("oracle ttm: shape mismatch");

  std::vector<std::size_t> out_dims = t.dims();
  out_dims[mode] = produced;
  DenseTensor out(out_dims);

  const std::size_t d = t.dims().size();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t k = 0; k < d; ++k) {
      idx[k] = rest % out_dims[k];
      rest /= out_dims[k];
    }
    double s = 0.0;
    std::vector<std::size_t> src = idx;
    for (std::size_t l = 0; l < contracted; ++l) {
      src[mode] = l;
      std::size_t off = 0;
      std::size_t stride = 1;
      for (std::size_t k = 0; k < d; ++k) {
        off += src[k] * stride;
        stride *= t.dims()[k];
      }
      const double w = transpose_a ? a(l, idx[mode]) : a(idx[mode], l);
      s += w * t[off];
    }
    out[flat] = s;
  }
  return out;
}

Svd jacobi_svd(const Matrix& a) {
  // Work tall: one-sided Jacobi orthogonalizes columns.
  const bool flipped = a.rows() < a.cols();
  Matrix b = flipped ? tucker::transpose(a) : a;
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  Matrix v = Matrix::identity(n);

  const double eps = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += b(i, p) * b(i, p);
          aqq += b(i, q) * b(i, q);
          apq += b(i, p) * b(i, q);
        }
        if (std::abs(apq) <= eps * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  Matrix u(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(s);
    if (sigma[j] > 0.0)
      for (std::size_t i = 0; i < m; ++i) u(i, j) = b(i, j) / sigma[j];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return sigma[x] > sigma[y];
                   });
  Svd out;
  out.values.resize(n);
  Matrix su(m, n), sv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = sigma[order[j]];
    for (std::size_t i = 0; i < m; ++i) su(i, j) = u(i, order[j]);
    for (std::size_t i = 0; i < n; ++i) sv(i, j) = v(i, order[j]);
  }
  out.left = flipped ? std::move(sv) : std::move(su);
  out.right = flipped ? std::move(su) : std::move(sv);
  return out;
}

double subspace_gap(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw std::invalid_argument("oracle subspace_gap: shape mismatch");
  if (u.cols() == 0) return 0.0;
  const Svd s = jacobi_svd(matmul(u, v, /*transpose_a=*/true));
  double gap = 0.0;
  for (double x : s.values) gap = std::max(gap, std::abs(1.0 - x));
  return gap;
}

Matrix assemble(const Matrix& left, const std::vector<double>& values,
                const Matrix& right) {
  Matrix scaled = left;
  for (std::size_t j = 0; j < values.size(); ++j)
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, j) *= values[j];
  return matmul(scaled, right, false, /*transpose_b=*/true);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

DenseTensor random_tensor(const std::vector<std::size_t>& dims,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseTensor t(dims);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols,
                          std::uint64_t seed) {
  if (rows < cols)
    throw std::invalid_argument("oracle random_orthonormal: rows < cols");
  Matrix m = random_matrix(rows, cols, seed);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) dot += m(i, k) * m(i, j);
      for (std::size_t i = 0; i < rows; ++i) m(i, j) -= dot * m(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < rows; ++i) m(i, j) /= norm;
  }
  return m;
}

double sine_entry(const std::vector<std::size_t>& dims,
                  const std::vector<std::size_t>& bandwidths,
                  const std::vector<double>& coefficients,
                  const std::vector<std::size_t>& index) {
  const std::size_t d = dims.size();
  std::vector<std::size_t> widths(d);
  std::size_t n_terms = 1;
  for (std::size_t k = 0; k < d; ++k) {
    widths[k] = 2 * bandwidths[k] + 1;
    n_terms *= widths[k];
  }
  if (coefficients.size() != n_terms)
    throw std::invalid_argument("oracle sine_entry: coefficient count");

  std::complex<double> total = 0.0;
  std::vector<std::size_t> j(d, 0);
  for (std::size_t flat = 0; flat < n_terms; ++flat) {
    std::size_t rest = flat;
    for (std::size_t k = 0; k < d; ++k) {
      j[k] = rest % widths[k];
      rest /= widths[k];
    }
    std::complex<double> term = coefficients[flat];
    for (std::size_t k = 0; k < d; ++k) {
      const double freq =
          static_cast<double>(j[k]) - static_cast<double>(bandwidths[k]);
      const double x = 2.0 * std::numbers::pi *
                       static_cast<double>(index[k]) /
                       static_cast<double>(dims[k]);
      term *= std::exp(std::complex<double>(0.0, freq * x));
    }
    total += term;
  }
  return total.imag();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("oracle max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("oracle max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double relative_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("oracle relative_diff: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += a[i] * a[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace oracle
