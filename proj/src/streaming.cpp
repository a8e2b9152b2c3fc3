#include "tucker/streaming.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "tucker/alloc.hpp"
#include "tucker/log.hpp"

namespace tucker {
namespace {

constexpr double kCouplingTol = 1e-8;

// v_tensor's colexicographic buffer is exactly the column-major buffer of
// the n x r matrix unfold(v, d-1)^T, so the two views convert by copy.
Matrix right_matrix_from_v(const DenseTensor& v) {
  const std::size_t d = v.order();
  const std::size_t r = v.dim(d - 1);
  const std::size_t n = (r == 0) ? 0 : v.size() / r;
  Matrix q(n, r);
  std::copy(v.data(), v.data() + v.size(), q.data());
  return q;
}

DenseTensor v_from_right_matrix(const Matrix& q,
                                std::vector<std::size_t> dims) {
  DenseTensor v(std::move(dims));
  if (v.size() != q.size())
    throw std::invalid_argument("v_from_right_matrix: size mismatch");
  std::copy(q.data(), q.data() + q.size(), v.data());
  return v;
}

// core and v x_{d-1} diag(s) must agree; a violation means the two
// representations of the streaming factorization have drifted apart.
void check_core_coupling(const StreamingState& state) {
  const std::size_t d = state.order;
  const DenseTensor& core = state.model.core;
  const std::size_t r = core.dim(d - 1);
  const std::size_t slab = (r == 0) ? 0 : core.size() / r;
  double diff_sq = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    const double s = state.isvd.singular_values[j];
    const double* c = core.data() + j * slab;
    const double* v = state.v_tensor.data() + j * slab;
    for (std::size_t i = 0; i < slab; ++i) {
      const double diff = c[i] - v[i] * s;
      diff_sq += diff * diff;
    }
  }
  const double core_norm = frobenius_norm(core);
  if (std::sqrt(diff_sq) > kCouplingTol * core_norm + 1e-300) {
    log::error(
        "core/ISVD coupling drifted: ||core - v x s|| = {:.3e}, ||core|| = "
        "{:.3e} after {} slices",
        std::sqrt(diff_sq), core_norm, state.n_d);
    throw std::runtime_error(
        "streaming state invariant violated: core no longer matches the "
        "ISVD factorization");
  }
}

std::vector<std::size_t> current_ranks(const StreamingState& state) {
  std::vector<std::size_t> ranks = state.model.core.dims();
  return ranks;
}

}  // namespace

TuckerModel StreamingState::full_model() const {
  TuckerModel m;
  m.core = model.core;
  m.factors = model.factors;
  m.factors[order - 1] = isvd.left.to_matrix();
  m.tau = tau;
  m.mode_order = model.mode_order;
  return m;
}

StreamingState stream_init(const DenseTensor& x_init, double tau) {
  const std::size_t d = x_init.order();
  if (d < 2)
    throw std::invalid_argument(
        "stream_init: need at least one non-streaming mode");
  if (frobenius_norm(x_init) == 0.0)
    throw std::invalid_argument(
        "stream_init: initial batch must be nonzero to seed a factorization");

  SthosvdResult batch = sthosvd(x_init, tau);
  const std::size_t kd = d - 1;
  const std::size_t r = batch.model.core.dim(kd);

  // Final-mode spectrum -> singular values of the core's last unfolding.
  std::vector<double> s(r);
  for (std::size_t j = 0; j < r; ++j)
    s[j] = std::sqrt(batch.mode_eigenvalues[kd][j]);

  // v = core x_{d-1} diag(1/s): scale each trailing-mode slab.
  DenseTensor v = batch.model.core;
  const std::size_t slab = (r == 0) ? 0 : v.size() / r;
  for (std::size_t j = 0; j < r; ++j) {
    const double inv = 1.0 / s[j];
    double* p = v.data() + j * slab;
    for (std::size_t i = 0; i < slab; ++i) p[i] *= inv;
  }

  StreamingState state;
  state.isvd = isvd_init(batch.model.factors[kd], std::move(s),
                         right_matrix_from_v(v), batch.discarded_sq);
  state.model = std::move(batch.model);
  state.model.factors[kd] = Matrix();  // lives in isvd.left from here on
  state.v_tensor = std::move(v);
  state.n_d = x_init.dim(kd);
  state.tau = tau;
  state.order = d;
  state.total_input_sq = detail::sum_of_squares(x_init.data(), x_init.size());
  check_core_coupling(state);
  log::info("stream_init: {} slices, rank {}, estimate {:.3e}", state.n_d,
            state.isvd.rank(), estimate_relative_error(state));
  return state;
}

double process_nonstreaming_mode(StreamingState& state, DenseTensor& y,
                                 std::size_t mode, double delta) {
  const Matrix& u = state.model.factors[mode];
  DenseTensor projected = ttm(y, mode, u, /*transpose_a=*/true);
  DenseTensor residual = ttm(projected, mode, u);
  for (std::size_t i = 0; i < residual.size(); ++i)
    residual[i] = y[i] - residual[i];
  const double res_norm = frobenius_norm(residual);

  if (res_norm <= delta) {
    // Slice fits the current subspace within budget; drop the residual.
    state.nonstream_discarded_sq += res_norm * res_norm;
    y = std::move(projected);
    return res_norm;
  }

  // Expand span(U_k) with the residual's dominant directions.
  ModeSubspace sub = mode_subspace(residual, mode, delta);
  const std::size_t grown = sub.basis.cols();
  DenseTensor carried = ttm(residual, mode, sub.basis, /*transpose_a=*/true);
  state.model.factors[mode] = hcat(u, sub.basis);
  state.model.core = pad_with_zeros(state.model.core, mode, grown);
  state.v_tensor = pad_with_zeros(state.v_tensor, mode, grown);
  state.isvd.right = right_matrix_from_v(state.v_tensor);
  state.nonstream_discarded_sq += sub.discarded_sq;
  y = concat_along_mode(mode, projected, carried);
  log::debug("mode {} expanded by {} (residual {:.3e} > delta {:.3e})", mode,
             grown, res_norm, delta);
  return res_norm;
}

void stream_update(StreamingState& state, const DenseTensor& y) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = state.order;
  if (y.order() + 1 != d)
    throw std::invalid_argument("stream_update: slice must have d-1 modes");
  for (std::size_t k = 0; k + 1 < d; ++k)
    if (y.dim(k) != state.model.factors[k].rows())
      throw std::invalid_argument("stream_update: slice shape mismatch");

  SliceMetrics rec;
  rec.slice_index = state.n_d;
  rec.slice_norm = frobenius_norm(y);
  state.total_input_sq += rec.slice_norm * rec.slice_norm;

  if (rec.slice_norm == 0.0) {
    // Nothing to represent; keep invariants by appending a zero row only.
    state.isvd.left.append_zero_row();
    ++state.n_d;
    rec.ranks = current_ranks(state);
    rec.ranks.back() = state.isvd.rank();
    rec.mode_residuals.assign(d - 1, 0.0);
    rec.error_estimate = estimate_relative_error(state);
    rec.peak_bytes = AllocationTracker::peak_bytes();
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    state.metrics.steps.push_back(std::move(rec));
    return;
  }

  const double delta =
      state.tau * rec.slice_norm / std::sqrt(static_cast<double>(d));

  DenseTensor projected = y;
  for (std::size_t k = 0; k + 1 < d; ++k)
    rec.mode_residuals.push_back(
        process_nonstreaming_mode(state, projected, k, delta));
  rec.projected_norm = frobenius_norm(projected);

  // Streaming-mode update: insert vec(projected) as a new row, then rebuild
  // the core from the inner rotation — new core =
  // core x_d (P'_top^T (P^T P)) + projected x_d (last row of P')^T.
  const Matrix p_gram = state.isvd.left.column_gram();
  const AddRowResult ins = add_row(
      state.isvd, std::span<const double>(projected.data(), projected.size()),
      delta);

  Matrix inner_top(ins.r_old, ins.r_new);
  for (std::size_t j = 0; j < ins.r_new; ++j)
    for (std::size_t i = 0; i < ins.r_old; ++i)
      inner_top(i, j) = ins.inner_left(i, j);
  const Matrix rotate_core = multiply(inner_top, p_gram, true, false);

  DenseTensor new_core = ttm(state.model.core, d - 1, rotate_core);
  // Add projected x_d w, w = last row of P': slab j += w_j * projected.
  const std::size_t slab = projected.size();
  for (std::size_t j = 0; j < ins.r_new; ++j) {
    const double w = ins.inner_left(ins.r_old, j);
    if (w == 0.0) continue;
    double* c = new_core.data() + j * slab;
    for (std::size_t i = 0; i < slab; ++i) c[i] += w * projected[i];
  }
  state.model.core = std::move(new_core);

  std::vector<std::size_t> v_dims = state.model.core.dims();
  state.v_tensor = v_from_right_matrix(state.isvd.right, std::move(v_dims));
  ++state.n_d;
  check_core_coupling(state);

  rec.ranks = current_ranks(state);
  rec.error_estimate = estimate_relative_error(state);
  rec.peak_bytes = AllocationTracker::peak_bytes();
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  state.metrics.steps.push_back(std::move(rec));
}

double estimate_relative_error(const StreamingState& state) {
  if (state.total_input_sq <= 0.0) return 0.0;
  const double booked =
      state.isvd.squared_error + state.nonstream_discarded_sq;
  return std::sqrt(std::max(booked, 0.0) / state.total_input_sq);
}

StreamingState assemble_streaming_state(TuckerModel model, ISVDState isvd,
                                        double total_input_sq,
                                        double nonstream_discarded_sq) {
  StreamingState state;
  state.order = model.core.order();
  if (state.order < 2)
    throw std::invalid_argument("assemble_streaming_state: need d >= 2");
  if (model.factors.size() != state.order ||
      !model.factors[state.order - 1].empty())
    throw std::invalid_argument(
        "assemble_streaming_state: streaming-mode factor slot must be empty "
        "(it is carried by the ISVD left factor)");
  state.tau = model.tau;
  state.n_d = isvd.row_count();
  state.total_input_sq = total_input_sq;
  state.nonstream_discarded_sq = nonstream_discarded_sq;
  state.v_tensor = v_from_right_matrix(isvd.right, model.core.dims());
  state.model = std::move(model);
  state.isvd = std::move(isvd);
  check_core_coupling(state);
  return state;
}

}  // namespace tucker
