#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "tucker/datagen.hpp"
#include "tucker/sthosvd.hpp"
#include "tucker/tensor.hpp"

using tucker::DenseTensor;
using tucker::SineSpec;

namespace {

std::size_t box_size(const std::vector<std::size_t>& bandwidths) {
  std::size_t n = 1;
  for (std::size_t j : bandwidths) n *= 2 * j + 1;
  return n;
}

/// Numerical rank of a matrix at threshold rel * sigma_max.
std::size_t numerical_rank(const tucker::Matrix& m, double rel) {
  const oracle::Svd svd = oracle::jacobi_svd(m);
  if (svd.values.empty() || svd.values[0] == 0.0) return 0;
  std::size_t r = 0;
  for (double s : svd.values)
    if (s > rel * svd.values[0]) ++r;
  return r;
}

double slice_norm(const DenseTensor& x, std::size_t k) {
  const std::size_t slice_sz = x.size() / x.dim(x.order() - 1);
  double sq = 0.0;
  for (std::size_t i = 0; i < slice_sz; ++i) {
    const double v = x.data()[k * slice_sz + i];
    sq += v * v;
  }
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("zero bandwidths: every term is sin(0), the tensor vanishes") {
  SineSpec spec;
  spec.dims = {4, 5};
  spec.bandwidths = {0, 0};
  spec.coefficients = {1.0};
  const DenseTensor x = tucker::sine_tensor(spec);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == 0.0);
}

TEST_CASE("entries match the direct sum-of-sines oracle") {
  SineSpec spec;
  spec.dims = {5, 4, 3};
  spec.bandwidths = {1, 2, 0};
  // 3 * 5 * 1 = 15 explicit coefficients.
  REQUIRE(box_size(spec.bandwidths) == 15);
  for (std::size_t i = 0; i < 15; ++i)
    spec.coefficients.push_back(0.3 + 0.1 * static_cast<double>(i % 7) -
                                0.05 * static_cast<double>(i));
  const DenseTensor x = tucker::sine_tensor(spec);

  for (std::size_t i0 = 0; i0 < 5; ++i0)
    for (std::size_t i1 = 0; i1 < 4; i1 += 2)
      for (std::size_t i2 = 0; i2 < 3; ++i2) {
        const double expect = oracle::sine_entry(
            spec.dims, spec.bandwidths, spec.coefficients, {i0, i1, i2});
        CHECK(x(i0, i1, i2) ==
              doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      }
}

TEST_CASE("seeded coefficients give every unfolding rank 2J_k + 1") {
  SineSpec spec;
  spec.dims = {12, 10, 8};
  spec.bandwidths = {2, 1, 3};
  spec.seed = 99;
  const DenseTensor x = tucker::sine_tensor(spec);
  const std::size_t expected[] = {5, 3, 7};
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(numerical_rank(oracle::unfold_by_enumeration(x, k), 1e-10) ==
          expected[k]);
}

TEST_CASE("rank 2J+1 needs generic terms, not a single frequency") {
  // J = (1,1,1). The single corner term sin(x + y + z) spans only
  // {sin x, cos x} along each mode: rank 2. Generic coefficients also hit
  // the constant function and fill out the full 2J+1 = 3 per mode.
  SineSpec spec;
  spec.dims = {9, 6, 5};
  spec.bandwidths = {1, 1, 1};
  spec.coefficients.assign(27, 0.0);
  spec.coefficients[26] = 0.7;  // the (1, 1, 1) corner of the frequency box
  const DenseTensor single = tucker::sine_tensor(spec);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(numerical_rank(oracle::unfold_by_enumeration(single, k), 1e-10) ==
          2);

  spec.coefficients.clear();
  spec.seed = 7;
  const DenseTensor generic = tucker::sine_tensor(spec);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(numerical_rank(oracle::unfold_by_enumeration(generic, k), 1e-10) ==
          3);
}

TEST_CASE("two-way sines: sine parity caps the rank below 2J+1") {
  // At d = 2 the addition formula only produces products pairing an odd
  // x-function (sine) with an even y-function (cosine/constant) and vice
  // versa. That bipartite structure caps each mode rank at
  // min(J_0 + J_1, ...) + ... = 2 for J = (1,1), for ANY coefficients;
  // the generic 2J+1 rank law is a d >= 3 phenomenon.
  SineSpec spec;
  spec.dims = {9, 6};
  spec.bandwidths = {1, 1};
  spec.seed = 7;
  const DenseTensor x = tucker::sine_tensor(spec);
  CHECK(numerical_rank(oracle::unfold_by_enumeration(x, 0), 1e-10) == 2);
  CHECK(numerical_rank(oracle::unfold_by_enumeration(x, 1), 1e-10) == 2);
}

TEST_CASE("batch compressor recovers the (11,11,11) ground truth") {
  SineSpec spec;
  spec.dims = {50, 50, 100};
  spec.bandwidths = {5, 5, 5};
  spec.seed = 12345;
  const DenseTensor x = tucker::sine_tensor(spec);
  // tau = 1e-6 sits far below the structure (relative error ~4e-14 after
  // truncation) yet above the Gram eigenvalue noise floor (~1e-15 * lambda
  // max, i.e. ~3e-8 in singular values), so the exact rank pops out.
  const tucker::SthosvdResult r = tucker::sthosvd(x, 1e-6);
  CHECK(r.model.core.dims() == std::vector<std::size_t>{11, 11, 11});
  CHECK(tucker::relative_error(x, r.model) <= 1e-12);
}

TEST_CASE("sine_tensor input validation") {
  SineSpec spec;
  spec.dims = {4, 0};
  spec.bandwidths = {1, 1};
  CHECK_THROWS_AS((void)tucker::sine_tensor(spec), std::invalid_argument);

  spec.dims = {4, 4};
  spec.bandwidths = {1};
  CHECK_THROWS_AS((void)tucker::sine_tensor(spec), std::invalid_argument);

  spec.bandwidths = {1, 1};
  spec.coefficients = {1.0, 2.0};  // box is 9, not 2
  CHECK_THROWS_AS((void)tucker::sine_tensor(spec), std::invalid_argument);

  spec.coefficients.clear();
  spec.dims.clear();
  spec.bandwidths.clear();
  CHECK_THROWS_AS((void)tucker::sine_tensor(spec), std::invalid_argument);
}

TEST_CASE("add_noise: eta = 0 returns the input bit-exactly") {
  SineSpec spec;
  spec.dims = {6, 5, 7};
  spec.bandwidths = {1, 1, 2};
  spec.seed = 3;
  const DenseTensor x = tucker::sine_tensor(spec);
  const DenseTensor y = tucker::add_noise(x, 0.0, 17);
  CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
}

TEST_CASE("add_noise: per-slice noise-to-signal ratio is exact") {
  SineSpec spec;
  spec.dims = {8, 7, 9};
  spec.bandwidths = {2, 1, 2};
  spec.seed = 5;
  const DenseTensor x = tucker::sine_tensor(spec);
  const double eta = 3e-3;
  const DenseTensor y = tucker::add_noise(x, eta, 11);

  REQUIRE(y.dims() == x.dims());
  const std::size_t slice_sz = x.size() / 9;
  for (std::size_t k = 0; k < 9; ++k) {
    double noise_sq = 0.0;
    for (std::size_t i = 0; i < slice_sz; ++i) {
      const double d = y.data()[k * slice_sz + i] - x.data()[k * slice_sz + i];
      noise_sq += d * d;
    }
    const double ratio = std::sqrt(noise_sq) / slice_norm(x, k);
    CHECK(ratio == doctest::Approx(eta).epsilon(1e-12));
  }
}

TEST_CASE("add_noise: determinism and seed sensitivity") {
  SineSpec spec;
  spec.dims = {5, 6, 4};
  spec.bandwidths = {1, 2, 1};
  spec.seed = 21;
  const DenseTensor x = tucker::sine_tensor(spec);

  const DenseTensor a = tucker::add_noise(x, 0.01, 100);
  const DenseTensor b = tucker::add_noise(x, 0.01, 100);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

  const DenseTensor c = tucker::add_noise(x, 0.01, 101);
  CHECK(oracle::max_abs_diff(a, c) > 0.0);

  // The generator itself is a pure function of (spec, seed).
  const DenseTensor x2 = tucker::sine_tensor(spec);
  CHECK(std::memcmp(x.data(), x2.data(), x.size() * sizeof(double)) == 0);
}

TEST_CASE("add_noise: eta validation") {
  const DenseTensor x = oracle::random_tensor({3, 4}, 2);
  CHECK_THROWS_AS((void)tucker::add_noise(x, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)tucker::add_noise(x, 1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)tucker::add_noise(x, -0.1, 0), std::invalid_argument);
}

TEST_CASE("add_noise: an all-zero slice stays exactly zero") {
  // Slices with no signal have nothing to scale against; the noise model
  // keeps them silent rather than inventing energy.
  DenseTensor x({4, 3, 3});
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      x(i, j, 0) = 1.0 + static_cast<double>(i + j);
      x(i, j, 2) = -2.0 + static_cast<double>(i) * 0.5;
    }
  const DenseTensor y = tucker::add_noise(x, 0.25, 9);
  const std::size_t slice_sz = 12;
  for (std::size_t i = 0; i < slice_sz; ++i)
    CHECK(y.data()[slice_sz + i] == 0.0);
  // The nonzero slices did change.
  CHECK(slice_norm(y, 0) != slice_norm(x, 0));
}
