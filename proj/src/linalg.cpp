#include "tucker/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tucker/log.hpp"

namespace tucker {
namespace {

constexpr double kOffDiagTolFactor = 1e-14;
constexpr int kMaxSweeps = 30;
constexpr double kEigenNoiseClamp = 1e-12;
constexpr double kSigmaZeroFactor = 1e-14;

double off_diagonal_norm(const Matrix& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.cols(); ++j)
    for (std::size_t i = 0; i < g.rows(); ++i)
      if (i != j) s += g(i, j) * g(i, j);
  return std::sqrt(s);
}

// One Jacobi rotation zeroing g(p,q), accumulated into v.
void rotate(Matrix& g, Matrix& v, std::size_t p, std::size_t q) {
  const double gpq = g(p, q);
  if (gpq == 0.0) return;
  const double theta = (g(q, q) - g(p, p)) / (2.0 * gpq);
  const double t = (theta >= 0.0)
                       ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                       : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const std::size_t n = g.rows();
  const double gpp = g(p, p);
  const double gqq = g(q, q);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double gip = g(i, p);
    const double giq = g(i, q);
    g(i, p) = c * gip - s * giq;
    g(p, i) = g(i, p);
    g(i, q) = s * gip + c * giq;
    g(q, i) = g(i, q);
  }
  g(p, p) = gpp - t * gpq;
  g(q, q) = gqq + t * gpq;
  g(p, q) = 0.0;
  g(q, p) = 0.0;

  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = c * vip - s * viq;
    v(i, q) = s * vip + c * viq;
  }
}

}  // namespace

void orthonormalize_columns(Matrix& u) {
  const std::size_t n = u.rows();
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double* uj = u.col(j);
    for (std::size_t i = 0; i < j; ++i) {
      const double* ui = u.col(i);
      double dot = 0.0;
      for (std::size_t l = 0; l < n; ++l) dot += ui[l] * uj[l];
      for (std::size_t l = 0; l < n; ++l) uj[l] -= dot * ui[l];
    }
    const double norm = std::sqrt(detail::sum_of_squares(uj, n));
    if (norm > 0.0)
      for (std::size_t l = 0; l < n; ++l) uj[l] /= norm;
  }
}

Matrix gram_from_cols(const double* a, std::size_t rows, std::size_t cols) {
  Matrix g(rows, rows);
  for (std::size_t c = 0; c < cols; ++c) {
    const double* ac = a + c * rows;
    for (std::size_t j = 0; j < rows; ++j) {
      const double w = ac[j];
      if (w == 0.0) continue;
      double* gj = g.col(j);
      for (std::size_t i = 0; i <= j; ++i) gj[i] += ac[i] * w;
    }
  }
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i < j; ++i) g(j, i) = g(i, j);
  return g;
}

Matrix gram(const Matrix& m) {
  return gram_from_cols(m.data(), m.rows(), m.cols());
}

Matrix gram_transposed_from_cols(const double* a, std::size_t rows,
                                 std::size_t cols) {
  Matrix g(cols, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const double* aj = a + j * rows;
    for (std::size_t i = 0; i <= j; ++i) {
      const double* ai = a + i * rows;
      double dot = 0.0;
      for (std::size_t l = 0; l < rows; ++l) dot += ai[l] * aj[l];
      g(i, j) = dot;
      g(j, i) = dot;
    }
  }
  return g;
}

Matrix gram_transposed(const Matrix& m) {
  return gram_transposed_from_cols(m.data(), m.rows(), m.cols());
}

EigenResult sym_eig_desc(const Matrix& g_in) {
  if (g_in.rows() != g_in.cols())
    throw std::invalid_argument("sym_eig_desc: matrix must be square");
  const std::size_t n = g_in.rows();

  double max_abs = 0.0;
  double max_asym = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      max_abs = std::max(max_abs, std::abs(g_in(i, j)));
      max_asym = std::max(max_asym, std::abs(g_in(i, j) - g_in(j, i)));
    }
  if (max_asym > 1e-10 * std::max(max_abs, 1e-300))
    throw std::invalid_argument("sym_eig_desc: matrix is not symmetric");

  Matrix g = g_in;
  Matrix v = Matrix::identity(n);
  const double tol = kOffDiagTolFactor * frobenius_norm(g_in);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(g) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(g, v, p, q);
  }

  // Sort eigenpairs by descending eigenvalue; stable so repeated calls on
  // the same input produce bit-identical output.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return g(a, a) > g(b, b);
                   });

  EigenResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    scale = std::max(scale, std::abs(g(order[j], order[j])));
  for (std::size_t j = 0; j < n; ++j) {
    double lambda = g(order[j], order[j]);
    if (lambda < 0.0) {
      if (lambda < -kEigenNoiseClamp * scale)
        log::warn("sym_eig_desc: clamping negative eigenvalue {} to 0",
                  lambda);
      lambda = 0.0;
    }
    out.eigenvalues[j] = lambda;

    const double* src = v.col(order[j]);
    double* dst = out.eigenvectors.col(j);
    std::copy(src, src + n, dst);
    // Deterministic sign: make the largest-magnitude component (first such
    // index on ties) positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(dst[i]) > std::abs(dst[arg])) arg = i;
    if (dst[arg] < 0.0)
      for (std::size_t i = 0; i < n; ++i) dst[i] = -dst[i];
  }
  return out;
}

std::size_t truncation_rank(const std::vector<double>& eigenvalues,
                            double delta) {
  if (delta < 0.0)
    throw std::invalid_argument("truncation_rank: delta must be nonnegative");
  const std::size_t n = eigenvalues.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (eigenvalues[i] < 0.0)
      throw std::invalid_argument(
          "truncation_rank: eigenvalues must be nonnegative");
    if (i > 0 && eigenvalues[i] > eigenvalues[i - 1])
      throw std::invalid_argument(
          "truncation_rank: eigenvalues must be descending");
  }
  if (n == 0) return 0;

  // Suffix sums accumulated from the smallest values up, so the trailing
  // energy compared against delta^2 is not swamped by the leading terms.
  std::vector<double> trailing(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    trailing[i] = trailing[i + 1] + eigenvalues[i];

  const double budget = delta * delta;
  for (std::size_t r = 0; r <= n; ++r)
    if (trailing[r] <= budget) return std::max<std::size_t>(r, 1);
  return n;  // unreachable: trailing[n] == 0
}

SmallSVD small_svd_truncated(const Matrix& m, double abs_threshold) {
  if (abs_threshold < 0.0)
    throw std::invalid_argument(
        "small_svd_truncated: threshold must be nonnegative");
  SmallSVD out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.left = Matrix(m.rows(), 0);
    out.right = Matrix(m.cols(), 0);
    return out;
  }

  EigenResult eig = sym_eig_desc(gram_transposed(m));
  std::vector<double>& lambda = eig.eigenvalues;
  const double sigma_max = std::sqrt(lambda.front());
  if (sigma_max == 0.0) {
    out.left = Matrix(m.rows(), 0);
    out.right = Matrix(m.cols(), 0);
    return out;
  }
  // Zero out numerically-rank-deficient directions before rank selection so
  // the trailing-energy rule can never keep a direction we cannot normalize.
  const double sigma_floor = kSigmaZeroFactor * sigma_max;
  for (double& l : lambda)
    if (std::sqrt(l) <= sigma_floor) l = 0.0;

  const std::size_t rank = truncation_rank(lambda, abs_threshold);
  out.discarded_sq = 0.0;
  for (std::size_t j = lambda.size(); j-- > rank;)
    out.discarded_sq += lambda[j];

  out.singular_values.resize(rank);
  out.right = Matrix(m.cols(), rank);
  for (std::size_t j = 0; j < rank; ++j) {
    out.singular_values[j] = std::sqrt(lambda[j]);
    const double* src = eig.eigenvectors.col(j);
    std::copy(src, src + m.cols(), out.right.col(j));
  }

  // Left vectors by back-substitution u_j = m v_j / sigma_j, then one
  // Gram-Schmidt pass to undo the orthogonality loss this route suffers on
  // ill-conditioned inputs.
  out.left = multiply(m, out.right);
  for (std::size_t j = 0; j < rank; ++j) {
    double* uj = out.left.col(j);
    const double inv = 1.0 / out.singular_values[j];
    for (std::size_t i = 0; i < m.rows(); ++i) uj[i] *= inv;
  }
  orthonormalize_columns(out.left);
  return out;
}

}  // namespace tucker
