#pragma once

#include <cstddef>

#include "tucker/alloc.hpp"

namespace tucker {

namespace detail {
/// Pairwise (cascade) sum of squares; used by all norm computations.
double sum_of_squares(const double* p, std::size_t n);
}  // namespace detail

/// Dense column-major matrix of doubles with tracked storage.
class Matrix {
public:
  Matrix() = default;

  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[j * rows_ + i];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[j * rows_ + i];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  /// Pointer to the start of column j.
  double* col(std::size_t j) noexcept { return data_.data() + j * rows_; }
  const double* col(std::size_t j) const noexcept {
    return data_.data() + j * rows_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  TrackedVector data_;
};

/// General matrix product with optional implicit transposes:
/// multiply(a, b, ta, tb) = op(a) * op(b) where op(x) is x or x^T.
Matrix multiply(const Matrix& a, const Matrix& b, bool transpose_a = false,
                bool transpose_b = false);

Matrix transpose(const Matrix& m);

/// Horizontal concatenation [a b]; both operands must have equal row counts.
Matrix hcat(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);

/// max_ij |m^T m - I|_ij, a scale-free measure of column orthonormality.
double orthonormality_defect(const Matrix& m);

}  // namespace tucker
