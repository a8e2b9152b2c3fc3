#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "tucker/tensor.hpp"

namespace tucker {

/// Recipe for a sum-of-sines tensor with known multilinear rank:
/// X(i_1..i_d) = sum_j c_j * sin(sum_k j_k * x_{k,i_k}) over the frequency
/// box j_k in [-J_k, J_k], sampled at x_{k,i} = 2*pi*i/N_k. For generic
/// coefficients the mode-k rank is exactly 2*J_k + 1.
struct SineSpec {
  std::vector<std::size_t> dims;       /**< N_1..N_d, all positive */
  std::vector<std::size_t> bandwidths; /**< J_1..J_d */
  /// Dense coefficient array over the frequency box, colexicographic with
  /// index j_k + J_k along mode k. Left empty to draw magnitudes from
  /// uniform(0.5, 1.5) with random signs, seeded by `seed`.
  std::vector<double> coefficients;
  std::uint64_t seed = 0;
};

DenseTensor sine_tensor(const SineSpec& spec);

/// Add per-slice scaled Gaussian noise along the last mode: each slice gets
/// an independent standard-normal tensor rescaled so its Frobenius norm is
/// exactly eta times the clean slice's norm. eta must lie in [0, 1);
/// eta == 0 returns the input unchanged.
DenseTensor add_noise(const DenseTensor& x, double eta, std::uint64_t seed);

}  // namespace tucker
