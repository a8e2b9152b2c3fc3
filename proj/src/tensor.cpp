#include "tucker/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tucker {
namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (std::size_t n : dims) p *= n;
  return p;
}

void check_mode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order())
    throw std::out_of_range("mode index out of range for tensor order");
}

// Block shape of the buffer around `mode`: `left` entries per fiber step,
// dims[mode] fiber steps per slab, `right` slabs.
struct ModeBlocks {
  std::size_t left;
  std::size_t right;
};

ModeBlocks blocks_around(const std::vector<std::size_t>& dims,
                         std::size_t mode) {
  ModeBlocks b{1, 1};
  for (std::size_t l = 0; l < mode; ++l) b.left *= dims[l];
  for (std::size_t l = mode + 1; l < dims.size(); ++l) b.right *= dims[l];
  return b;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)),
      strides_(dims_.size()),
      data_(product(dims_), 0.0) {
  std::size_t s = 1;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    strides_[l] = s;
    s *= dims_[l];
  }
}

std::size_t DenseTensor::dim(std::size_t mode) const {
  if (mode >= dims_.size())
    throw std::out_of_range("mode index out of range for tensor order");
  return dims_[mode];
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> ix) const {
  assert(ix.size() == dims_.size());
  std::size_t off = 0;
  std::size_t l = 0;
  for (std::size_t i : ix) {
    assert(i < dims_[l]);
    off += i * strides_[l];
    ++l;
  }
  return off;
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(t, mode);
  const std::size_t n = t.dim(mode);
  const std::size_t cols = (n == 0) ? 0 : t.size() / n;
  Matrix m(n, cols);
  const auto [left, right] = blocks_around(t.dims(), mode);
  const double* src = t.data();
  // Column j of the unfolding corresponds to (l, r) with j = l + r*left;
  // the source element sits at l + i*left + r*left*n.
  for (std::size_t r = 0; r < right; ++r) {
    const double* slab = src + r * left * n;
    for (std::size_t l = 0; l < left; ++l) {
      double* dst = m.col(l + r * left);
      for (std::size_t i = 0; i < n; ++i) dst[i] = slab[l + i * left];
    }
  }
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode,
                 const std::vector<std::size_t>& dims) {
  if (mode >= dims.size())
    throw std::out_of_range("mode index out of range for tensor order");
  if (m.rows() != dims[mode] || m.size() != product(dims))
    throw std::invalid_argument("fold: matrix shape does not match dims");
  DenseTensor t(dims);
  const std::size_t n = dims[mode];
  const auto [left, right] = blocks_around(dims, mode);
  double* dst = t.data();
  for (std::size_t r = 0; r < right; ++r) {
    double* slab = dst + r * left * n;
    for (std::size_t l = 0; l < left; ++l) {
      const double* src = m.col(l + r * left);
      for (std::size_t i = 0; i < n; ++i) slab[l + i * left] = src[i];
    }
  }
  return t;
}

DenseTensor ttm(const DenseTensor& t, std::size_t mode, const Matrix& a,
                bool transpose_a) {
  check_mode(t, mode);
  const std::size_t n = t.dim(mode);
  const std::size_t contracted = transpose_a ? a.rows() : a.cols();
  const std::size_t produced = transpose_a ? a.cols() : a.rows();
  if (contracted != n)
    throw std::invalid_argument("ttm: matrix does not match mode size");

  std::vector<std::size_t> out_dims = t.dims();
  out_dims[mode] = produced;
  DenseTensor out(out_dims);
  const auto [left, right] = blocks_around(t.dims(), mode);

  if (mode == 0) {
    // The buffer is already the mode-0 unfolding; one pass of
    // column-major matrix products over the right-hand blocks.
    for (std::size_t r = 0; r < right; ++r) {
      const double* x = t.data() + r * n;
      double* y = out.data() + r * produced;
      if (transpose_a) {
        for (std::size_t j = 0; j < produced; ++j) {
          const double* ajc = a.col(j);
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += ajc[i] * x[i];
          y[j] = s;
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = x[i];
          if (xi == 0.0) continue;
          const double* aic = a.col(i);
          for (std::size_t j = 0; j < produced; ++j) y[j] += aic[j] * xi;
        }
      }
    }
    return out;
  }

  // Each right-hand block is a contiguous left x n column-major slab S;
  // the output slab is S * op(a)^T, computed as axpy updates over the
  // contiguous left-sized fibers.
  for (std::size_t r = 0; r < right; ++r) {
    const double* src = t.data() + r * left * n;
    double* dst = out.data() + r * left * produced;
    for (std::size_t i = 0; i < n; ++i) {
      const double* si = src + i * left;
      for (std::size_t j = 0; j < produced; ++j) {
        const double w = transpose_a ? a(i, j) : a(j, i);
        if (w == 0.0) continue;
        double* dj = dst + j * left;
        for (std::size_t l = 0; l < left; ++l) dj[l] += si[l] * w;
      }
    }
  }
  return out;
}

double frobenius_norm(const DenseTensor& t) {
  return std::sqrt(detail::sum_of_squares(t.data(), t.size()));
}

DenseTensor pad_with_zeros(const DenseTensor& t, std::size_t mode,
                           std::size_t extra) {
  check_mode(t, mode);
  std::vector<std::size_t> out_dims = t.dims();
  out_dims[mode] += extra;
  DenseTensor out(out_dims);
  const std::size_t n = t.dim(mode);
  const auto [left, right] = blocks_around(t.dims(), mode);
  // Copy each old slab into the front of the widened slab; the tail of the
  // widened slab is already zero.
  for (std::size_t r = 0; r < right; ++r) {
    const double* src = t.data() + r * left * n;
    double* dst = out.data() + r * left * (n + extra);
    std::copy(src, src + left * n, dst);
  }
  return out;
}

DenseTensor concat_along_mode(std::size_t mode, const DenseTensor& a,
                              const DenseTensor& b) {
  check_mode(a, mode);
  if (a.order() != b.order())
    throw std::invalid_argument("concat_along_mode: order mismatch");
  for (std::size_t l = 0; l < a.order(); ++l) {
    if (l != mode && a.dims()[l] != b.dims()[l])
      throw std::invalid_argument("concat_along_mode: shape mismatch");
  }
  std::vector<std::size_t> out_dims = a.dims();
  out_dims[mode] += b.dims()[mode];
  DenseTensor out(out_dims);
  const std::size_t na = a.dim(mode);
  const std::size_t nb = b.dim(mode);
  const auto [left, right] = blocks_around(a.dims(), mode);
  for (std::size_t r = 0; r < right; ++r) {
    double* dst = out.data() + r * left * (na + nb);
    const double* sa = a.data() + r * left * na;
    const double* sb = b.data() + r * left * nb;
    std::copy(sa, sa + left * na, dst);
    std::copy(sb, sb + left * nb, dst + left * na);
  }
  return out;
}

}  // namespace tucker
