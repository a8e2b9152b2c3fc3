#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "tucker/matrix.hpp"

namespace tucker {

/// Dense d-way tensor of doubles.
///
/// Storage is colexicographic ("generalized column-major"): mode 0 varies
/// fastest, so element (i_0, ..., i_{d-1}) lives at offset
/// sum_l i_l * prod_{m<l} N_m. Consequences used throughout the library:
///  - the mode-0 unfolding is the raw buffer viewed as an N_0 x (size/N_0)
///    column-major matrix (no copy needed),
///  - hyperslices along the last mode are contiguous blocks,
///  - vec(t) in the usual column-major sense is exactly the buffer.
class DenseTensor {
public:
  DenseTensor() = default;

  /// Zero-filled tensor with the given mode sizes.
  explicit DenseTensor(std::vector<std::size_t> dims);

  std::size_t order() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t mode) const;
  std::size_t size() const noexcept { return data_.size(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  template <class... Ix>
  double& operator()(Ix... ix) {
    return data_[offset({static_cast<std::size_t>(ix)...})];
  }
  template <class... Ix>
  double operator()(Ix... ix) const {
    return data_[offset({static_cast<std::size_t>(ix)...})];
  }

private:
  std::size_t offset(std::initializer_list<std::size_t> ix) const;

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  TrackedVector data_;
};

/// Mode-k unfolding (matricization): an N_k x (size/N_k) matrix whose column
/// index runs colexicographically over the remaining modes.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold: rebuild a tensor with the given mode sizes from its
/// mode-k unfolding.
DenseTensor fold(const Matrix& m, std::size_t mode,
                 const std::vector<std::size_t>& dims);

/// Mode-k tensor-times-matrix product: out_(k) = op(a) * t_(k), where op(a)
/// is a or a^T. The contracted side of op(a) must match dim(k).
DenseTensor ttm(const DenseTensor& t, std::size_t mode, const Matrix& a,
                bool transpose_a = false);

double frobenius_norm(const DenseTensor& t);

/// Append `extra` zero hyperslices along `mode`.
DenseTensor pad_with_zeros(const DenseTensor& t, std::size_t mode,
                           std::size_t extra);

/// Stack b after a along `mode`; all other mode sizes must agree.
DenseTensor concat_along_mode(std::size_t mode, const DenseTensor& a,
                              const DenseTensor& b);

}  // namespace tucker
