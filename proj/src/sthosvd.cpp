#include "tucker/sthosvd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tucker/log.hpp"

namespace tucker {
namespace {

constexpr double kSigmaZeroFactor = 1e-14;

void validate_mode_order(std::vector<std::size_t>& order, std::size_t d) {
  if (order.empty()) {
    order.resize(d);
    std::iota(order.begin(), order.end(), 0);
    return;
  }
  if (order.size() != d)
    throw std::invalid_argument("mode_order must have one entry per mode");
  std::vector<bool> seen(d, false);
  for (std::size_t k : order) {
    if (k >= d || seen[k])
      throw std::invalid_argument("mode_order must be a permutation of 0..d-1");
    seen[k] = true;
  }
}

double trailing_sum(const std::vector<double>& v, std::size_t from) {
  double s = 0.0;
  for (std::size_t i = v.size(); i-- > from;) s += v[i];
  return s;
}

}  // namespace

ModeSubspace mode_subspace(const DenseTensor& t, std::size_t mode,
                           double delta) {
  const std::size_t rows = t.dim(mode);
  const std::size_t cols = (rows == 0) ? 0 : t.size() / rows;
  ModeSubspace out;

  if (rows <= cols) {
    // Gram route: eigendecompose the N_k x N_k matrix C_(k) C_(k)^T.
    const Matrix g = (mode == 0)
                         ? gram_from_cols(t.data(), rows, cols)
                         : gram(unfold(t, mode));
    EigenResult eig = sym_eig_desc(g);
    const std::size_t rank = truncation_rank(eig.eigenvalues, delta);
    out.discarded_sq = trailing_sum(eig.eigenvalues, rank);
    out.basis = Matrix(rows, rank);
    for (std::size_t j = 0; j < rank; ++j) {
      const double* src = eig.eigenvectors.col(j);
      std::copy(src, src + rows, out.basis.col(j));
    }
    out.eigenvalues = std::move(eig.eigenvalues);
    return out;
  }

  // Thin route (more rows than columns): the spectrum beyond `cols` is
  // exactly zero, so eigendecompose the smaller C_(k)^T C_(k) and recover
  // the basis by back-substitution, as in small_svd_truncated.
  const Matrix m = unfold(t, mode);
  EigenResult eig = sym_eig_desc(gram_transposed(m));
  std::vector<double>& lambda = eig.eigenvalues;
  const double sigma_max = lambda.empty() ? 0.0 : std::sqrt(lambda.front());
  const double sigma_floor = kSigmaZeroFactor * sigma_max;
  for (double& l : lambda)
    if (std::sqrt(l) <= sigma_floor) l = 0.0;

  const std::size_t rank = truncation_rank(lambda, delta);
  out.discarded_sq = trailing_sum(lambda, rank);

  Matrix kept(cols, rank);
  for (std::size_t j = 0; j < rank; ++j) {
    const double* src = eig.eigenvectors.col(j);
    std::copy(src, src + cols, kept.col(j));
  }
  out.basis = multiply(m, kept);
  for (std::size_t j = 0; j < rank; ++j) {
    const double inv = 1.0 / std::sqrt(lambda[j]);
    double* bj = out.basis.col(j);
    for (std::size_t i = 0; i < rows; ++i) bj[i] *= inv;
  }
  orthonormalize_columns(out.basis);

  out.eigenvalues = std::move(lambda);
  out.eigenvalues.resize(rows, 0.0);
  return out;
}

SthosvdResult sthosvd(const DenseTensor& x, double tau,
                      std::vector<std::size_t> mode_order) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("sthosvd: tau must lie in (0, 1)");
  const std::size_t d = x.order();
  if (d == 0) throw std::invalid_argument("sthosvd: tensor order must be >= 1");
  validate_mode_order(mode_order, d);

  SthosvdResult out;
  out.model.tau = tau;
  out.model.mode_order = mode_order;
  out.model.factors.resize(d);
  out.mode_eigenvalues.resize(d);

  const double norm = frobenius_norm(x);
  if (norm == 0.0) {
    log::warn("sthosvd: zero input tensor, returning rank-(1,...,1) model");
    out.model.core = DenseTensor(std::vector<std::size_t>(d, 1));
    for (std::size_t k = 0; k < d; ++k) {
      out.model.factors[k] = Matrix(x.dim(k), 1);
      if (x.dim(k) > 0) out.model.factors[k](0, 0) = 1.0;
      out.mode_eigenvalues[k].assign(x.dim(k), 0.0);
    }
    return out;
  }

  const double delta = tau * norm / std::sqrt(static_cast<double>(d));
  DenseTensor core = x;
  for (std::size_t k : mode_order) {
    ModeSubspace sub = mode_subspace(core, k, delta);
    core = ttm(core, k, sub.basis, /*transpose_a=*/true);
    out.model.factors[k] = std::move(sub.basis);
    out.mode_eigenvalues[k] = std::move(sub.eigenvalues);
    out.discarded_sq += sub.discarded_sq;
    log::debug("sthosvd: mode {} rank {} discarded_sq {:.3e}", k,
               out.model.factors[k].cols(), sub.discarded_sq);
  }
  out.model.core = std::move(core);
  return out;
}

DenseTensor reconstruct(const TuckerModel& m) {
  const std::size_t d = m.core.order();
  if (m.factors.size() != d)
    throw std::invalid_argument("reconstruct: factor count does not match core");
  for (std::size_t k = 0; k < d; ++k)
    if (m.factors[k].cols() != m.core.dim(k))
      throw std::invalid_argument(
          "reconstruct: factor columns do not match core dims");
  DenseTensor t = m.core;
  for (std::size_t k = 0; k < d; ++k) t = ttm(t, k, m.factors[k]);
  return t;
}

double relative_error(const DenseTensor& x, const TuckerModel& m) {
  DenseTensor r = reconstruct(m);
  if (r.dims() != x.dims())
    throw std::invalid_argument("relative_error: shape mismatch");
  const double norm = frobenius_norm(x);
  if (norm == 0.0) {
    if (frobenius_norm(r) == 0.0) return 0.0;
    throw std::invalid_argument(
        "relative_error: zero-norm input with nonzero reconstruction");
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= x[i];
  return frobenius_norm(r) / norm;
}

double compression_ratio(const TuckerModel& m) {
  double numerator = 1.0;
  double stored = 1.0;  // core entries
  double factor_entries = 0.0;
  for (std::size_t k = 0; k < m.core.order(); ++k) {
    const double n = static_cast<double>(m.factors[k].rows());
    const double r = static_cast<double>(m.core.dim(k));
    numerator *= n;
    stored *= r;
    factor_entries += n * r;
  }
  const double denom = stored + factor_entries;
  return denom > 0.0 ? numerator / denom : 0.0;
}

}  // namespace tucker
