#pragma once

#include <cstddef>
#include <vector>

#include "tucker/isvd.hpp"
#include "tucker/sthosvd.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

/// Per-slice log entry appended by stream_update.
struct SliceMetrics {
  std::size_t slice_index = 0; /**< 0-based index along the streaming mode */
  std::vector<std::size_t> ranks; /**< R_1..R_d after absorbing the slice */
  std::size_t peak_bytes = 0; /**< process-wide tracked high-water mark */
  double wall_ms = 0.0;
  double slice_norm = 0.0;     /**< ||Y||_F of the raw slice */
  double projected_norm = 0.0; /**< ||Y||_F after all mode projections */
  std::vector<double> mode_residuals; /**< ||E||_F per non-streaming mode */
  double error_estimate = 0.0; /**< estimate_relative_error after update */
};

struct RunMetrics {
  std::vector<SliceMetrics> steps;
};

/// Streaming Tucker compressor state. The factor matrix of the streaming
/// (last) mode is not stored in `model` — it lives in isvd.left, which grows
/// a row per slice; model.factors[d-1] stays empty and full_model()
/// materializes it on demand. v_tensor couples the core to the ISVD right
/// factor: unfold(v_tensor, d-1)^T shares its buffer layout with isvd.right,
/// and core = v_tensor x_{d-1} diag(singular values) at all times.
struct StreamingState {
  TuckerModel model;
  ISVDState isvd;
  DenseTensor v_tensor;
  std::size_t n_d = 0; /**< slices absorbed (rows of the streaming factor) */
  double tau = 0.0;
  std::size_t order = 0; /**< d, total modes including the streaming one */
  RunMetrics metrics;
  double total_input_sq = 0.0; /**< ||X_init||^2 + sum of slice norms^2 */
  double nonstream_discarded_sq = 0.0; /**< energy dropped outside the ISVD */

  /// The streaming-mode factor as a plain matrix (n_d x R_d).
  Matrix streaming_factor() const { return isvd.left.to_matrix(); }

  /// Model with all d factors materialized, suitable for reconstruct().
  TuckerModel full_model() const;
};

/// Compress an initial batch (streaming mode last and of size >= 1) with the
/// batch algorithm and set up the incremental machinery on its final-mode
/// factorization. The batch error ledger seeds the ISVD ledger.
StreamingState stream_init(const DenseTensor& x_init, double tau);

/// Absorb one slice (a (d-1)-way tensor matching the non-streaming dims).
/// Per-mode subspace expansion first, then an ISVD row insertion and the
/// streaming-mode core update; the per-slice budget is
/// delta = tau * ||y||_F / sqrt(d) for every stage. Appends one metrics
/// record. Throws std::runtime_error if the core / ISVD coupling invariant
/// breaks (beyond 1e-8 relative), which indicates unrecoverable drift.
void stream_update(StreamingState& state, const DenseTensor& y);

/// One non-streaming mode step of stream_update (exposed for testing):
/// project y onto span(U_k); if the residual exceeds delta, grow U_k with
/// the residual's dominant directions, zero-pad the core and v_tensor, and
/// carry the residual coefficients into y. Returns ||E||_F.
double process_nonstreaming_mode(StreamingState& state, DenseTensor& y,
                                 std::size_t mode, double delta);

/// Ledger-based estimate of the relative error of the maintained
/// factorization against the full (never materialized) stream seen so far:
/// sqrt(total booked squared error / total input energy). Never exceeds tau.
/// It upper-bounds the true error whenever the non-streaming bases stop
/// expanding after init (discards are then mutually orthogonal); later basis
/// growth introduces cross terms that can push the true error slightly above
/// the estimate, though never above tau.
double estimate_relative_error(const StreamingState& state);

/// Reassemble a state from checkpointed pieces: a model whose streaming
/// factor slot is empty, the ISVD state carrying that factor, and the two
/// ledger scalars. Rebuilds v_tensor from isvd.right and validates the
/// coupling invariant before returning.
StreamingState assemble_streaming_state(TuckerModel model, ISVDState isvd,
                                        double total_input_sq,
                                        double nonstream_discarded_sq);

}  // namespace tucker
