#include "tucker/datagen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tucker {
namespace {

std::size_t box_size(const std::vector<std::size_t>& bandwidths) {
  std::size_t p = 1;
  for (std::size_t j : bandwidths) p *= 2 * j + 1;
  return p;
}

}  // namespace

DenseTensor sine_tensor(const SineSpec& spec) {
  const std::size_t d = spec.dims.size();
  if (d == 0) throw std::invalid_argument("sine_tensor: dims must be nonempty");
  if (spec.bandwidths.size() != d)
    throw std::invalid_argument("sine_tensor: one bandwidth per mode");
  for (std::size_t n : spec.dims)
    if (n == 0) throw std::invalid_argument("sine_tensor: dims must be positive");

  std::vector<std::size_t> box_dims(d);
  for (std::size_t k = 0; k < d; ++k) box_dims[k] = 2 * spec.bandwidths[k] + 1;

  std::vector<double> coeffs = spec.coefficients;
  if (coeffs.empty()) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    std::bernoulli_distribution flip(0.5);
    coeffs.resize(box_size(spec.bandwidths));
    for (double& c : coeffs) {
      const double m = magnitude(rng);
      c = flip(rng) ? -m : m;
    }
  } else if (coeffs.size() != box_size(spec.bandwidths)) {
    throw std::invalid_argument(
        "sine_tensor: coefficient count must match the frequency box");
  }

  // Evaluate X = Im(c x_1 A_1 ... x_d A_d) with A_k(i,j) = exp(i f_j x_i),
  // carried as a (real, imaginary) pair of tensors through real TTMs.
  DenseTensor real_part(box_dims);
  std::copy(coeffs.begin(), coeffs.end(), real_part.data());
  DenseTensor imag_part(box_dims);

  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = spec.dims[k];
    const std::size_t w = box_dims[k];
    const double j0 = static_cast<double>(spec.bandwidths[k]);
    Matrix a_cos(n, w);
    Matrix a_sin(n, w);
    for (std::size_t j = 0; j < w; ++j) {
      const double f = static_cast<double>(j) - j0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
        a_cos(i, j) = std::cos(f * x);
        a_sin(i, j) = std::sin(f * x);
      }
    }
    DenseTensor re_cos = ttm(real_part, k, a_cos);
    DenseTensor im_sin = ttm(imag_part, k, a_sin);
    DenseTensor re_sin = ttm(real_part, k, a_sin);
    DenseTensor im_cos = ttm(imag_part, k, a_cos);
    for (std::size_t i = 0; i < re_cos.size(); ++i) re_cos[i] -= im_sin[i];
    for (std::size_t i = 0; i < re_sin.size(); ++i) re_sin[i] += im_cos[i];
    real_part = std::move(re_cos);
    imag_part = std::move(re_sin);
  }
  return imag_part;
}

DenseTensor add_noise(const DenseTensor& x, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::invalid_argument("add_noise: eta must lie in [0, 1)");
  DenseTensor out = x;
  if (eta == 0.0 || x.order() == 0 || x.size() == 0) return out;

  const std::size_t n_d = x.dim(x.order() - 1);
  const std::size_t slab = x.size() / n_d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TrackedVector noise(slab, 0.0);

  for (std::size_t s = 0; s < n_d; ++s) {
    for (double& v : noise) v = gauss(rng);
    const double* clean = x.data() + s * slab;
    const double clean_norm =
        std::sqrt(detail::sum_of_squares(clean, slab));
    const double noise_norm =
        std::sqrt(detail::sum_of_squares(noise.data(), slab));
    if (clean_norm == 0.0 || noise_norm == 0.0) continue;
    const double scale = eta * clean_norm / noise_norm;
    double* dst = out.data() + s * slab;
    for (std::size_t i = 0; i < slab; ++i) dst[i] += scale * noise[i];
  }
  return out;
}

}  // namespace tucker
