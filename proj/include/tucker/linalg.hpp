#pragma once

#include <cstddef>
#include <vector>

#include "tucker/matrix.hpp"

namespace tucker {

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
struct EigenResult {
  /// Non-increasing; tiny negative values (numerical noise) are clamped to 0.
  std::vector<double> eigenvalues;
  /// Orthonormal columns; column j pairs with eigenvalues[j]. Sign
  /// convention: the largest-magnitude component of each column is positive.
  Matrix eigenvectors;
};

/// Truncated singular value decomposition of a small dense matrix.
struct SmallSVD {
  Matrix left;                         /**< orthonormal columns */
  std::vector<double> singular_values; /**< positive, descending */
  Matrix right;                        /**< orthonormal columns */
  double discarded_sq = 0.0; /**< squared Frobenius mass of dropped part */
};

/// m * m^T, exactly symmetric. gram_from_cols is the same product computed
/// straight from a column-major buffer (rows x cols) without a Matrix wrapper,
/// so unfoldings that already exist in memory need not be copied.
Matrix gram(const Matrix& m);
Matrix gram_from_cols(const double* a, std::size_t rows, std::size_t cols);

/// m^T * m, exactly symmetric; same raw-buffer variant.
Matrix gram_transposed(const Matrix& m);
Matrix gram_transposed_from_cols(const double* a, std::size_t rows,
                                 std::size_t cols);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius mass falls below 1e-14 * ||g||_F (at most 30
/// sweeps). Intended for the positive semidefinite Gram matrices this library
/// produces; genuinely negative eigenvalues are clamped to zero and logged.
EigenResult sym_eig_desc(const Matrix& g);

/// Smallest rank R whose trailing eigenvalue sum satisfies
/// lambda_{R+1} + ... + lambda_n <= delta^2, clamped to R >= 1 for nonempty
/// input (an all-discarded factorization is not representable downstream).
/// Eigenvalues must be descending and nonnegative.
std::size_t truncation_rank(const std::vector<double>& eigenvalues,
                            double delta);

/// Rank-minimal truncated SVD with ||m - left * diag(s) * right^T||_F below
/// abs_threshold, via eigendecomposition of m^T m. Singular values at or
/// below 1e-14 * sigma_max are treated as exact zeros.
SmallSVD small_svd_truncated(const Matrix& m, double abs_threshold);

/// One in-place modified Gram-Schmidt pass with renormalization. Restores
/// orthonormality (to roundoff) of columns that are already nearly
/// orthonormal; zero columns are left untouched.
void orthonormalize_columns(Matrix& m);

}  // namespace tucker
