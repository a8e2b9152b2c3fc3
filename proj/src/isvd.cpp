#include "tucker/isvd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tucker/log.hpp"

namespace tucker {
namespace {

constexpr double kOrthEps = 1e-12;
constexpr double kOrthoTol = 1e-6;

std::size_t round_up8(std::size_t n) { return (n + 7) / 8 * 8; }

}  // namespace

GrowableRowMatrix::GrowableRowMatrix(const Matrix& m) {
  cols_ = m.cols();
  ensure_capacity(cols_);
  TrackedVector row(cols_, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < cols_; ++j) row[j] = m(i, j);
    append_row(std::span<const double>(row.data(), cols_));
  }
}

void GrowableRowMatrix::ensure_capacity(std::size_t new_cols) {
  if (new_cols <= col_capacity_) return;
  const std::size_t grown =
      std::max(round_up8(new_cols), round_up8(col_capacity_ * 3 / 2));
  // Regrow chunk by chunk so the transient is one chunk, not the matrix.
  for (TrackedVector& chunk : chunks_) {
    TrackedVector wider(kChunkRows * grown, 0.0);
    const std::size_t n = chunk.size() / std::max<std::size_t>(col_capacity_, 1);
    for (std::size_t r = 0; r < n && col_capacity_ > 0; ++r)
      std::copy(chunk.data() + r * col_capacity_,
                chunk.data() + r * col_capacity_ + cols_,
                wider.data() + r * grown);
    chunk.swap(wider);
  }
  col_capacity_ = grown;
}

void GrowableRowMatrix::append_row(std::span<const double> v) {
  if (v.size() != cols_)
    throw std::invalid_argument("append_row: row length mismatch");
  ensure_capacity(cols_);
  if (rows_ == chunks_.size() * kChunkRows)
    chunks_.emplace_back(kChunkRows * col_capacity_, 0.0);
  ++rows_;
  if (cols_ > 0) std::copy(v.begin(), v.end(), row_ptr(rows_ - 1));
}

void GrowableRowMatrix::append_zero_row() {
  if (rows_ == chunks_.size() * kChunkRows)
    chunks_.emplace_back(kChunkRows * col_capacity_, 0.0);
  ++rows_;
  if (cols_ > 0) {
    double* r = row_ptr(rows_ - 1);
    std::fill(r, r + cols_, 0.0);
  }
}

void GrowableRowMatrix::right_multiply(const Matrix& m) {
  if (m.rows() != cols_)
    throw std::invalid_argument("right_multiply: inner dimension mismatch");
  const std::size_t new_cols = m.cols();
  const std::size_t old_cols = cols_;
  ensure_capacity(new_cols);
  TrackedVector tmp(new_cols, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double* row = row_ptr(i);
    for (std::size_t j = 0; j < new_cols; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < old_cols; ++l) s += row[l] * m(l, j);
      tmp[j] = s;
    }
    std::copy(tmp.begin(), tmp.end(), row);
    if (new_cols < old_cols) std::fill(row + new_cols, row + old_cols, 0.0);
  }
  cols_ = new_cols;
}

Matrix GrowableRowMatrix::column_gram() const {
  Matrix g(cols_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = row_ptr(i);
    for (std::size_t j = 0; j < cols_; ++j) {
      const double w = row[j];
      if (w == 0.0) continue;
      double* gj = g.col(j);
      for (std::size_t l = 0; l <= j; ++l) gj[l] += row[l] * w;
    }
  }
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < j; ++i) g(j, i) = g(i, j);
  return g;
}

void GrowableRowMatrix::reorthogonalize() {
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double* row = row_ptr(r);
        dot += row[i] * row[j];
      }
      for (std::size_t r = 0; r < rows_; ++r) {
        double* row = row_ptr(r);
        row[j] -= dot * row[i];
      }
    }
    double sq = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double v = row_ptr(r)[j];
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > 0.0)
      for (std::size_t r = 0; r < rows_; ++r) row_ptr(r)[j] /= norm;
  }
}

Matrix GrowableRowMatrix::to_matrix() const {
  Matrix m(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = row_ptr(i);
    for (std::size_t j = 0; j < cols_; ++j) m(i, j) = row[j];
  }
  return m;
}

ISVDState isvd_init(const Matrix& left, std::vector<double> singular_values,
                    const Matrix& right, double initial_sq_error,
                    ISVDOptions options) {
  const std::size_t r = singular_values.size();
  if (left.cols() != r || right.cols() != r)
    throw std::invalid_argument("isvd_init: factor widths must equal rank");
  if (orthonormality_defect(left) > kOrthoTol)
    throw std::invalid_argument("isvd_init: left factor not orthonormal");
  if (orthonormality_defect(right) > kOrthoTol)
    throw std::invalid_argument("isvd_init: right factor not orthonormal");
  for (std::size_t j = 0; j < r; ++j) {
    if (!(singular_values[j] > 0.0))
      throw std::invalid_argument("isvd_init: singular values must be positive");
    if (j > 0 && singular_values[j] > singular_values[j - 1])
      throw std::invalid_argument("isvd_init: singular values must descend");
  }
  if (!(initial_sq_error >= 0.0))
    throw std::invalid_argument(
        "isvd_init: initial squared error must be nonnegative");
  ISVDState state;
  state.left = GrowableRowMatrix(left);
  state.singular_values = std::move(singular_values);
  state.right = right;
  state.squared_error = initial_sq_error;
  state.options = options;
  return state;
}

AddRowResult add_row(ISVDState& state, std::span<const double> b,
                     double abs_tol) {
  const std::size_t n = state.width();
  const std::size_t r = state.rank();
  if (b.size() != n)
    throw std::invalid_argument("add_row: row length does not match width");
  if (abs_tol < 0.0)
    throw std::invalid_argument("add_row: threshold must be nonnegative");

  const double norm_b = std::sqrt(detail::sum_of_squares(b.data(), n));

  // Split b into Q p + e with e ⟂ span(Q). A second projection pass keeps q
  // numerically orthogonal even when the residual is tiny relative to b.
  TrackedVector p(r, 0.0);
  TrackedVector e(b.begin(), b.end());
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < r; ++j) {
      const double* qj = state.right.col(j);
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += qj[i] * e[i];
      p[j] += dot;
      for (std::size_t i = 0; i < n; ++i) e[i] -= dot * qj[i];
    }
  }
  const double k = std::sqrt(detail::sum_of_squares(e.data(), n));

  AddRowResult result;
  result.r_old = r;
  result.degenerate = (k <= kOrthEps * norm_b);

  if (result.degenerate && r == 0) {
    // Zero row onto an empty factorization: nothing to represent.
    state.left.append_zero_row();
    ++state.insertions;
    result.inner_left = Matrix(1, 0);
    return result;
  }

  // Middle matrix: diag(s) stacked over [p^T k]; the k column is dropped in
  // the degenerate branch (no new direction worth adding).
  const std::size_t inner_cols = result.degenerate ? r : r + 1;
  Matrix s_prime(r + 1, inner_cols);
  for (std::size_t j = 0; j < r; ++j) {
    s_prime(j, j) = state.singular_values[j];
    s_prime(r, j) = p[j];
  }
  if (!result.degenerate) s_prime(r, r) = k;

  SmallSVD inner = small_svd_truncated(s_prime, abs_tol);
  result.r_new = inner.singular_values.size();
  result.added_error_sq = inner.discarded_sq;
  if (result.degenerate) result.added_error_sq += k * k;
  state.squared_error += result.added_error_sq;

  // right: [Q q] Q' (or Q Q' when q was dropped)
  if (result.degenerate) {
    state.right = multiply(state.right, inner.right);
  } else {
    Matrix q(n, 1);
    const double inv = 1.0 / k;
    for (std::size_t i = 0; i < n; ++i) q(i, 0) = e[i] * inv;
    state.right = multiply(hcat(state.right, q), inner.right);
  }

  // left: blkdiag(P, 1) * P' — existing rows see the top block of P', the
  // new row is P's last row.
  Matrix inner_top(r, result.r_new);
  TrackedVector last_row(result.r_new, 0.0);
  for (std::size_t j = 0; j < result.r_new; ++j) {
    for (std::size_t i = 0; i < r; ++i) inner_top(i, j) = inner.left(i, j);
    last_row[j] = inner.left(r, j);
  }
  state.left.right_multiply(inner_top);
  state.left.append_row(std::span<const double>(last_row.data(),
                                                last_row.size()));

  state.singular_values = std::move(inner.singular_values);
  result.inner_left = std::move(inner.left);
  ++state.insertions;

  if (state.options.reorthogonalize_every > 0 &&
      state.insertions % state.options.reorthogonalize_every == 0) {
    state.left.reorthogonalize();
    orthonormalize_columns(state.right);
    log::debug("isvd: reorthogonalized after {} insertions", state.insertions);
  }
  return result;
}

std::pair<double, double> isvd_error_identity_check(
    const std::vector<std::vector<double>>& rows, double tol) {
  if (rows.empty()) return {0.0, 0.0};
  const std::size_t n = rows.front().size();
  if (rows.size() > 64 || n > 64)
    throw std::invalid_argument(
        "isvd_error_identity_check: materialization oracle is test-scale only");
  for (const auto& row : rows)
    if (row.size() != n)
      throw std::invalid_argument(
          "isvd_error_identity_check: ragged row lengths");

  ISVDState state =
      isvd_init(Matrix(0, 0), {}, Matrix(n, 0), /*initial_sq_error=*/0.0);
  for (const auto& row : rows) {
    const double norm =
        std::sqrt(detail::sum_of_squares(row.data(), row.size()));
    add_row(state, std::span<const double>(row.data(), row.size()),
            tol * norm);
  }

  // lhs: materialize A and the factorization, take the squared residual.
  const Matrix left = state.left.to_matrix();
  Matrix scaled = left;
  for (std::size_t j = 0; j < state.rank(); ++j) {
    double* c = scaled.col(j);
    for (std::size_t i = 0; i < scaled.rows(); ++i)
      c[i] *= state.singular_values[j];
  }
  const Matrix approx = multiply(scaled, state.right, false, true);
  double lhs = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = rows[i][j] - approx(i, j);
      lhs += diff * diff;
    }
  return {lhs, state.squared_error};
}

}  // namespace tucker
