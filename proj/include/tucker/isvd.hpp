#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tucker/linalg.hpp"
#include "tucker/matrix.hpp"

namespace tucker {

/// Row-major matrix that grows one row at a time, stored as fixed-height
/// chunks so neither appending a row nor widening the column count ever
/// needs a transient proportional to the full row count: every reallocation
/// moves one chunk. This is what keeps the streaming update's footprint
/// independent of how many slices have been absorbed.
class GrowableRowMatrix {
public:
  GrowableRowMatrix() = default;
  explicit GrowableRowMatrix(const Matrix& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return row_ptr(i)[j];
  }

  void append_row(std::span<const double> v);
  void append_zero_row();

  /// Replace every row v by v * m (m must have cols() rows); the column
  /// count becomes m.cols().
  void right_multiply(const Matrix& m);

  /// this^T * this (cols x cols), accumulated row by row.
  Matrix column_gram() const;

  /// Modified Gram-Schmidt pass over the columns (drift repair knob).
  void reorthogonalize();

  Matrix to_matrix() const;

private:
  static constexpr std::size_t kChunkRows = 256;

  const double* row_ptr(std::size_t i) const {
    return chunks_[i / kChunkRows].data() + (i % kChunkRows) * col_capacity_;
  }
  double* row_ptr(std::size_t i) {
    return chunks_[i / kChunkRows].data() + (i % kChunkRows) * col_capacity_;
  }
  void ensure_capacity(std::size_t new_cols);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t col_capacity_ = 0;
  std::vector<TrackedVector> chunks_;
};

struct ISVDOptions {
  /// Re-orthogonalize both factor matrices after every K insertions;
  /// 0 disables the pass (the plain update drifts slowly enough for
  /// realistic stream lengths).
  std::size_t reorthogonalize_every = 0;
};

/// Incrementally maintained truncated SVD A ~ left * diag(s) * right^T of a
/// tall matrix that only ever grows by rows. squared_error accumulates the
/// exact squared Frobenius error of the maintained factorization against the
/// (never materialized) exact matrix: each add_row call adds precisely the
/// energy its inner truncation discarded.
struct ISVDState {
  GrowableRowMatrix left;             /**< m x r, orthonormal columns */
  std::vector<double> singular_values; /**< length r, positive descending */
  Matrix right;                       /**< n x r, orthonormal columns */
  double squared_error = 0.0;
  ISVDOptions options;
  std::size_t insertions = 0; /**< add_row calls since initialization */

  std::size_t rank() const noexcept { return singular_values.size(); }
  std::size_t row_count() const noexcept { return left.rows(); }
  std::size_t width() const noexcept { return right.rows(); }
};

/// Start from an existing factorization. Both factor matrices must be
/// orthonormal within 1e-6 and the singular values positive descending;
/// initial_sq_error seeds the error ledger (e.g. with the squared error of
/// the factorization being handed over).
ISVDState isvd_init(const Matrix& left, std::vector<double> singular_values,
                    const Matrix& right, double initial_sq_error,
                    ISVDOptions options = {});

/// What one add_row call did; inner_left is the (r_old+1) x r_new left factor
/// of the inner small SVD, which callers embedding this update in a larger
/// transformation (the streaming core update) need verbatim.
struct AddRowResult {
  Matrix inner_left;
  std::size_t r_old = 0;
  std::size_t r_new = 0;
  bool degenerate = false;  /**< residual too small to add a new direction */
  double added_error_sq = 0.0;
};

/// Append one row b to the factorized matrix. The row is split into its
/// component inside span(right) and the orthogonal residual; the inner
/// (r+1)-sized middle matrix is re-truncated against abs_tol and both factor
/// matrices are updated in O((rows + width) * rank^2) time.
AddRowResult add_row(ISVDState& state, std::span<const double> b,
                     double abs_tol);

/// Materialization oracle for the error ledger: streams `rows` through a
/// fresh state (per-row threshold tol * ||row||), then returns
/// lhs = ||A - left*diag(s)*right^T||_F^2 computed from the materialized A,
/// and rhs = the accumulated squared_error. Test-scale only (dims <= 64).
std::pair<double, double> isvd_error_identity_check(
    const std::vector<std::vector<double>>& rows, double tol);

}  // namespace tucker
