#include "tucker/io.hpp"

#include <spdlog/fmt/fmt.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <limits>
#include <system_error>
#include <utility>

#include "tucker/isvd.hpp"

namespace tucker {

namespace fs = std::filesystem;

namespace {

constexpr char kTensorMagic[8] = {'T', 'U', 'C', 'K', 'T', 'N', 'S', 'R'};
constexpr char kModelMagic[8] = {'T', 'U', 'C', 'K', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kMaxOrder = 64;
constexpr const char* kCsvHeader =
    "algorithm,tau,ranks,peak_bytes,wall_ms,rel_error";

// All files are little-endian on disk; swap on big-endian hosts.
template <class T>
T to_little_endian(T v) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else if constexpr (sizeof(T) == 4) {
    return std::bit_cast<T>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  } else {
    return std::bit_cast<T>(__builtin_bswap64(std::bit_cast<std::uint64_t>(v)));
  }
}

void read_exact(std::istream& in, void* dst, std::size_t n,
                const std::string& path) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) == n && in) return;
  if (in.bad())
    throw IoError(IoStatus::io_failure, path, "read failed");
  throw IoError(IoStatus::truncated, path,
                "file ends before the declared payload");
}

template <class T>
T read_scalar(std::istream& in, const std::string& path) {
  T v;
  read_exact(in, &v, sizeof(T), path);
  return to_little_endian(v);
}

void read_doubles(std::istream& in, double* dst, std::size_t n,
                  const std::string& path) {
  read_exact(in, dst, n * sizeof(double), path);
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = to_little_endian(dst[i]);
  }
}

void write_exact(std::ostream& out, const void* src, std::size_t n) {
  out.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
}

template <class T>
void write_scalar(std::ostream& out, T v) {
  const T le = to_little_endian(v);
  write_exact(out, &le, sizeof(T));
}

void write_doubles(std::ostream& out, const double* src, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    write_exact(out, src, n * sizeof(double));
  } else {
    for (std::size_t i = 0; i < n; ++i) write_scalar(out, src[i]);
  }
}

void write_size_list(std::ostream& out, const std::vector<std::size_t>& v) {
  for (std::size_t x : v) write_scalar<std::uint64_t>(out, x);
}

std::vector<std::size_t> read_size_list(std::istream& in, std::size_t count,
                                        const std::string& path) {
  std::vector<std::size_t> v(count);
  for (auto& x : v) x = static_cast<std::size_t>(read_scalar<std::uint64_t>(in, path));
  return v;
}

/// Product of a dimension list with zero / overflow rejection.
std::size_t checked_product(const std::vector<std::size_t>& dims,
                            const std::string& path) {
  std::size_t p = 1;
  for (std::size_t d : dims) {
    if (d == 0 || d > std::numeric_limits<std::size_t>::max() / p)
      throw IoError(IoStatus::shape_mismatch, path,
                    "dimension list has a zero or overflowing entry");
    p *= d;
  }
  return p;
}

void check_magic(std::istream& in, const char (&expect)[8],
                 const std::string& path) {
  char magic[8];
  read_exact(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, expect, sizeof(magic)) != 0)
    throw IoError(IoStatus::bad_magic, path,
                  fmt::format("expected signature \"{}\"",
                              std::string(expect, sizeof(magic))));
}

void check_version(std::istream& in, const std::string& path) {
  const auto version = read_scalar<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw IoError(IoStatus::bad_version, path,
                  fmt::format("unsupported format version {}", version));
}

std::size_t remaining_bytes(std::istream& in, const std::string& path) {
  const auto here = in.tellg();
  std::error_code ec;
  const auto total = fs::file_size(path, ec);
  if (ec || here < 0) return std::numeric_limits<std::size_t>::max();
  const auto pos = static_cast<std::uintmax_t>(here);
  return pos > total ? 0 : static_cast<std::size_t>(total - pos);
}

void require_payload(std::istream& in, std::size_t doubles_needed,
                     std::size_t extra_bytes, const std::string& path) {
  const std::size_t limit = remaining_bytes(in, path);
  if (doubles_needed > limit / sizeof(double) ||
      doubles_needed * sizeof(double) + extra_bytes > limit)
    throw IoError(IoStatus::truncated, path,
                  "file ends before the declared payload");
}

std::ifstream open_for_reading(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(IoStatus::io_failure, path, "cannot open for reading");
  return in;
}

/// Writes go to a sibling temp file renamed into place on success, so
/// readers never observe a partial file and a failed write changes nothing.
class AtomicWriter {
public:
  explicit AtomicWriter(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_)
      throw IoError(IoStatus::io_failure, path_, "cannot open for writing");
  }

  ~AtomicWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    const bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok)
      throw IoError(IoStatus::io_failure, path_, "write failed");
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec)
      throw IoError(IoStatus::io_failure, path_,
                    fmt::format("rename failed: {}", ec.message()));
    committed_ = true;
  }

private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

const char* status_name(IoStatus s) {
  switch (s) {
    case IoStatus::ok: return "ok";
    case IoStatus::bad_magic: return "bad magic";
    case IoStatus::bad_version: return "bad version";
    case IoStatus::truncated: return "truncated";
    case IoStatus::shape_mismatch: return "shape mismatch";
    case IoStatus::io_failure: return "io failure";
  }
  return "unknown";
}

void validate_model_for_save(const TuckerModel& model, bool streaming) {
  const std::size_t d = model.core.order();
  if (d == 0) throw std::invalid_argument("cannot save an order-0 model");
  if (model.factors.size() != d)
    throw std::invalid_argument("model factor count does not match core order");
  if (model.mode_order.size() != d)
    throw std::invalid_argument("model mode order does not match core order");
  for (std::size_t k = 0; k < d; ++k) {
    if (streaming && k == d - 1) {
      if (!model.factors[k].empty())
        throw std::invalid_argument(
            "streaming model must keep the last factor slot empty");
      continue;
    }
    if (model.factors[k].cols() != model.core.dim(k))
      throw std::invalid_argument(
          "factor column count does not match core dimension");
  }
}

}  // namespace

IoError::IoError(IoStatus status, std::string path, const std::string& message)
    : std::runtime_error(fmt::format("{}: {} ({})", path, message,
                                     status_name(status))),
      status_(status),
      path_(std::move(path)) {}

DenseTensor read_tensor(const std::string& path) {
  std::ifstream in = open_for_reading(path);
  check_magic(in, kTensorMagic, path);
  check_version(in, path);
  const auto ndims = read_scalar<std::uint32_t>(in, path);
  if (ndims == 0 || ndims > kMaxOrder)
    throw IoError(IoStatus::shape_mismatch, path,
                  fmt::format("unreasonable tensor order {}", ndims));
  const auto dims = read_size_list(in, ndims, path);
  const std::size_t n = checked_product(dims, path);
  require_payload(in, n, 0, path);
  DenseTensor t(dims);
  read_doubles(in, t.data(), n, path);
  return t;
}

void write_tensor(const std::string& path, const DenseTensor& t) {
  if (t.order() == 0 || t.order() > kMaxOrder)
    throw std::invalid_argument("tensor must have order in [1, 64] to be saved");
  AtomicWriter w(path);
  std::ostream& out = w.stream();
  write_exact(out, kTensorMagic, sizeof(kTensorMagic));
  write_scalar<std::uint32_t>(out, kFormatVersion);
  write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  write_size_list(out, t.dims());
  write_doubles(out, t.data(), t.size());
  w.commit();
}

TuckerModel CheckpointData::full_model() const {
  TuckerModel m = model;
  if (has_isvd) m.factors.back() = isvd_left;
  return m;
}

namespace {

/// Shared header + core + factors writer for both checkpoint flavors.
void write_checkpoint_common(std::ostream& out, const TuckerModel& model,
                             const std::vector<std::size_t>& dims,
                             bool has_isvd) {
  const std::size_t d = model.core.order();
  write_exact(out, kModelMagic, sizeof(kModelMagic));
  write_scalar<std::uint32_t>(out, kFormatVersion);
  write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  write_size_list(out, dims);
  write_size_list(out, model.core.dims());
  write_scalar<double>(out, model.tau);
  write_size_list(out, model.mode_order);
  write_scalar<std::uint32_t>(out, has_isvd ? 1 : 0);
  write_doubles(out, model.core.data(), model.core.size());
  for (std::size_t k = 0; k < d; ++k) {
    if (has_isvd && k == d - 1) continue;
    const Matrix& f = model.factors[k];
    write_doubles(out, f.data(), f.size());
  }
}

}  // namespace

void save_model(const std::string& path, const TuckerModel& model) {
  validate_model_for_save(model, /*streaming=*/false);
  std::vector<std::size_t> dims;
  dims.reserve(model.factors.size());
  for (const Matrix& f : model.factors) dims.push_back(f.rows());
  AtomicWriter w(path);
  write_checkpoint_common(w.stream(), model, dims, /*has_isvd=*/false);
  w.commit();
}

void save_checkpoint(const std::string& path, const StreamingState& state) {
  validate_model_for_save(state.model, /*streaming=*/true);
  const std::size_t d = state.order;
  std::vector<std::size_t> dims(d);
  for (std::size_t k = 0; k + 1 < d; ++k) dims[k] = state.model.factors[k].rows();
  dims[d - 1] = state.n_d;

  AtomicWriter w(path);
  std::ostream& out = w.stream();
  write_checkpoint_common(out, state.model, dims, /*has_isvd=*/true);

  const ISVDState& isvd = state.isvd;
  write_doubles(out, isvd.singular_values.data(), isvd.singular_values.size());
  const Matrix left = state.streaming_factor();
  write_doubles(out, left.data(), left.size());
  write_doubles(out, isvd.right.data(), isvd.right.size());
  write_scalar<double>(out, isvd.squared_error);
  write_scalar<double>(out, state.total_input_sq);
  write_scalar<double>(out, state.nonstream_discarded_sq);
  write_scalar<std::uint64_t>(out, state.n_d);
  w.commit();
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in = open_for_reading(path);
  check_magic(in, kModelMagic, path);
  check_version(in, path);
  const auto d = static_cast<std::size_t>(read_scalar<std::uint32_t>(in, path));
  if (d == 0 || d > kMaxOrder)
    throw IoError(IoStatus::shape_mismatch, path,
                  fmt::format("unreasonable model order {}", d));
  const auto dims = read_size_list(in, d, path);
  const auto ranks = read_size_list(in, d, path);
  const double tau = read_scalar<double>(in, path);
  const auto mode_order = read_size_list(in, d, path);
  const auto has_isvd_raw = read_scalar<std::uint32_t>(in, path);
  if (has_isvd_raw > 1)
    throw IoError(IoStatus::shape_mismatch, path, "invalid streaming flag");
  const bool has_isvd = has_isvd_raw == 1;

  const std::size_t core_n = checked_product(ranks, path);
  checked_product(dims, path);  // reject zero / overflowing entries
  if (!(tau > 0.0 && tau < 1.0))
    throw IoError(IoStatus::shape_mismatch, path,
                  "stored tolerance outside (0, 1)");
  {
    std::vector<bool> seen(d, false);
    for (std::size_t m : mode_order) {
      if (m >= d || seen[m])
        throw IoError(IoStatus::shape_mismatch, path,
                      "mode order is not a permutation");
      seen[m] = true;
    }
  }
  for (std::size_t k = 0; k < d; ++k)
    if (ranks[k] > dims[k])
      throw IoError(IoStatus::shape_mismatch, path,
                    "stored rank exceeds the matching dimension");
  if (has_isvd && d < 2)
    throw IoError(IoStatus::shape_mismatch, path,
                  "streaming checkpoint needs at least two modes");

  // Everything after the flag has a size fully determined by the header;
  // reject short files before allocating the payload buffers.
  std::size_t doubles_needed = core_n;
  for (std::size_t k = 0; k < d; ++k) {
    if (has_isvd && k == d - 1) continue;
    doubles_needed += dims[k] * ranks[k];
  }
  std::size_t width = 1;
  std::size_t extra_bytes = 0;
  if (has_isvd) {
    for (std::size_t k = 0; k + 1 < d; ++k) width *= ranks[k];
    const std::size_t r = ranks[d - 1];
    doubles_needed += r + dims[d - 1] * r + width * r + 3;
    extra_bytes = sizeof(std::uint64_t);
  }
  require_payload(in, doubles_needed, extra_bytes, path);

  CheckpointData data;
  data.has_isvd = has_isvd;
  data.model.tau = tau;
  data.model.mode_order = mode_order;
  data.model.core = DenseTensor(ranks);
  read_doubles(in, data.model.core.data(), core_n, path);
  data.model.factors.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (has_isvd && k == d - 1) continue;
    data.model.factors[k] = Matrix(dims[k], ranks[k]);
    read_doubles(in, data.model.factors[k].data(),
                 data.model.factors[k].size(), path);
  }
  if (has_isvd) {
    const std::size_t r = ranks[d - 1];
    data.singular_values.resize(r);
    read_doubles(in, data.singular_values.data(), r, path);
    data.isvd_left = Matrix(dims[d - 1], r);
    read_doubles(in, data.isvd_left.data(), data.isvd_left.size(), path);
    data.isvd_right = Matrix(width, r);
    read_doubles(in, data.isvd_right.data(), data.isvd_right.size(), path);
    data.squared_error = read_scalar<double>(in, path);
    data.total_input_sq = read_scalar<double>(in, path);
    data.nonstream_discarded_sq = read_scalar<double>(in, path);
    data.n_d = static_cast<std::size_t>(read_scalar<std::uint64_t>(in, path));
    if (data.n_d != dims[d - 1])
      throw IoError(IoStatus::shape_mismatch, path,
                    "slice count does not match the streaming factor height");
  }
  return data;
}

StreamingState from_checkpoint(const CheckpointData& data) {
  if (!data.has_isvd)
    throw std::invalid_argument(
        "checkpoint holds a batch model, not a resumable stream");
  ISVDState isvd = isvd_init(data.isvd_left, data.singular_values,
                             data.isvd_right, data.squared_error);
  return assemble_streaming_state(data.model, std::move(isvd),
                                  data.total_input_sq,
                                  data.nonstream_discarded_sq);
}

std::string slice_filename(std::size_t index) {
  return fmt::format("slice_{:06}", index);
}

MetricsCsv::MetricsCsv(const std::string& path_or_dash) {
  if (path_or_dash == "-") {
    to_stdout_ = true;
    std::cout << kCsvHeader << '\n';
    return;
  }
  std::error_code ec;
  const bool fresh = !fs::exists(path_or_dash, ec) ||
                     fs::file_size(path_or_dash, ec) == 0;
  file_.open(path_or_dash, std::ios::app);
  if (!file_)
    throw IoError(IoStatus::io_failure, path_or_dash,
                  "cannot open metrics file for appending");
  if (fresh) file_ << kCsvHeader << '\n';
}

void MetricsCsv::write_row(const std::string& algorithm, double tau,
                           const std::vector<std::size_t>& ranks,
                           std::size_t peak_bytes, double wall_ms,
                           double rel_error) {
  std::string rank_str;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (i) rank_str += 'x';
    rank_str += fmt::format("{}", ranks[i]);
  }
  const std::string row =
      fmt::format("{},{:g},{},{},{:.3f},{:.9e}", algorithm, tau, rank_str,
                  peak_bytes, wall_ms, rel_error);
  if (to_stdout_) {
    std::cout << row << '\n' << std::flush;
  } else {
    file_ << row << '\n' << std::flush;
  }
}

}  // namespace tucker
