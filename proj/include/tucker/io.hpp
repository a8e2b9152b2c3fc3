#pragma once

#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tucker/sthosvd.hpp"
#include "tucker/streaming.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

enum class IoStatus {
  ok,
  bad_magic,      /**< file does not start with the expected signature */
  bad_version,    /**< recognized signature, unsupported format version */
  truncated,      /**< file ended before the header-declared payload */
  shape_mismatch, /**< structurally valid but inconsistent dimensions */
  io_failure,     /**< open/read/write/rename failed */
};

class IoError : public std::runtime_error {
public:
  IoError(IoStatus status, std::string path, const std::string& message);
  IoStatus status() const noexcept { return status_; }
  const std::string& path() const noexcept { return path_; }

private:
  IoStatus status_;
  std::string path_;
};

/// Dense tensor container ("TUCKTNSR" v1): header with dims, then the raw
/// colexicographic payload as little-endian 64-bit floats. Round-trips are
/// bit-exact. Writes land in a temp file renamed into place, so a failed
/// write never leaves a partial artifact.
DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& t);

/// Everything a "TUCKCKPT" v1 file carries. Batch models store all d
/// factors; streaming checkpoints keep the streaming-mode factor inside the
/// ISVD section instead (model.factors[d-1] stays empty) plus the error
/// ledger needed to continue the stream.
struct CheckpointData {
  TuckerModel model;
  bool has_isvd = false;
  std::vector<double> singular_values;
  Matrix isvd_left;
  Matrix isvd_right;
  double squared_error = 0.0;
  double total_input_sq = 0.0;
  double nonstream_discarded_sq = 0.0;
  std::size_t n_d = 0;

  /// Model with every factor present (materializes the streaming factor).
  TuckerModel full_model() const;
};

void save_model(const std::string& path, const TuckerModel& model);
void save_checkpoint(const std::string& path, const StreamingState& state);
CheckpointData load_checkpoint(const std::string& path);

/// Rebuild a live streaming state from checkpoint contents.
StreamingState from_checkpoint(const CheckpointData& data);

/// Name of the per-slice tensor file with the given 0-based index
/// ("slice_000042").
std::string slice_filename(std::size_t index);

/// Metrics sink with the fixed schema
/// algorithm,tau,ranks,peak_bytes,wall_ms,rel_error. Streams to stdout when
/// the path is "-"; otherwise appends to the file, emitting the header only
/// when the file is new or empty. Rows are flushed as they are written.
class MetricsCsv {
public:
  explicit MetricsCsv(const std::string& path_or_dash);
  void write_row(const std::string& algorithm, double tau,
                 const std::vector<std::size_t>& ranks, std::size_t peak_bytes,
                 double wall_ms, double rel_error);

private:
  std::ofstream file_;
  bool to_stdout_ = false;
};

}  // namespace tucker
