#pragma once

#include <cstddef>
#include <vector>

#include "tucker/linalg.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

/// Tucker factorization: a small core tensor plus one orthonormal factor
/// matrix per mode, x ~ core x_1 U_1 ... x_d U_d.
struct TuckerModel {
  DenseTensor core;            /**< R_1 x ... x R_d */
  std::vector<Matrix> factors; /**< factor k is N_k x R_k, orthonormal cols */
  double tau = 0.0;            /**< relative error tolerance used to build */
  std::vector<std::size_t> mode_order; /**< truncation order actually used */
};

/// sthosvd output: the model plus the spectra the truncation decisions were
/// made from (one descending eigenvalue list per mode, length N_k) and the
/// exact squared Frobenius error ledger (sum of all discarded eigenvalues).
struct SthosvdResult {
  TuckerModel model;
  std::vector<std::vector<double>> mode_eigenvalues;
  double discarded_sq = 0.0;
};

/// Dominant mode-k subspace of t at absolute threshold delta, found through
/// the Gram eigendecomposition of the mode-k unfolding (or of its transpose
/// when that matrix is thin). The trailing eigenvalue sum of the discarded
/// directions is at most delta^2; eigenvalues has one entry per mode-k index.
struct ModeSubspace {
  Matrix basis; /**< N_k x R, orthonormal columns */
  std::vector<double> eigenvalues;
  double discarded_sq = 0.0;
};
ModeSubspace mode_subspace(const DenseTensor& t, std::size_t mode,
                           double delta);

/// Sequentially truncated HOSVD with a guaranteed relative reconstruction
/// error: ||x - reconstruct(model)||_F <= tau * ||x||_F. Each mode in
/// mode_order (default 0..d-1) is truncated against the per-mode budget
/// delta = tau * ||x||_F / sqrt(d) and the partial core shrinks in place
/// before the next mode is processed. A zero tensor yields a rank-(1,...,1)
/// zero model (logged as a warning).
SthosvdResult sthosvd(const DenseTensor& x, double tau,
                      std::vector<std::size_t> mode_order = {});

/// Expand a model back into the dense tensor it approximates.
DenseTensor reconstruct(const TuckerModel& m);

/// ||x - reconstruct(m)||_F / ||x||_F. Zero x with a zero reconstruction is
/// defined as 0; zero x otherwise is an error.
double relative_error(const DenseTensor& x, const TuckerModel& m);

/// N_1...N_d / (R_1...R_d + sum_k N_k R_k): input elements per stored value.
double compression_ratio(const TuckerModel& m);

}  // namespace tucker
