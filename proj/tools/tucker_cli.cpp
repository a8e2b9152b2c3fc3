// Command-line driver for the Tucker compression library.
//
// Subcommands: synth (make sine-wave test data), compress (batch), stream
// (incremental with checkpoints), reconstruct, diff. All numeric exchange
// goes through the binary tensor/checkpoint containers in tucker/io.hpp.
//
// Exit codes: 0 success; 1 internal error; 2 invalid arguments or shapes;
// 3 bad file signature; 4 unsupported file version; 5 truncated file;
// 6 inconsistent shapes inside a file; 7 filesystem/read/write failure.
// Flag parsing errors use the parser's own nonzero codes.

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tucker/alloc.hpp"
#include "tucker/datagen.hpp"
#include "tucker/io.hpp"
#include "tucker/log.hpp"
#include "tucker/sthosvd.hpp"
#include "tucker/streaming.hpp"
#include "tucker/tensor.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += fmt::format("{}", v[i]);
  }
  return s;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> bandwidths;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string slices_dir;
};

int run_synth(const SynthArgs& a) {
  if (a.out.empty() && a.slices_dir.empty())
    throw std::invalid_argument("synth needs --out and/or --slices-dir");
  if (!a.slices_dir.empty() && a.dims.size() < 2)
    throw std::invalid_argument("--slices-dir needs at least two modes");

  tucker::SineSpec spec;
  spec.dims = a.dims;
  spec.bandwidths = a.bandwidths;
  spec.seed = a.seed;
  tucker::DenseTensor x = tucker::sine_tensor(spec);
  // Separate stream for the noise so the clean tensor is reproducible from
  // the same seed regardless of eta.
  x = tucker::add_noise(x, a.eta, a.seed + 1);

  if (!a.out.empty()) {
    tucker::write_tensor(a.out, x);
    tucker::log::info("wrote {} ({} doubles)", a.out, x.size());
  }
  if (!a.slices_dir.empty()) {
    fs::create_directories(a.slices_dir);
    const std::size_t d = x.order();
    const std::size_t n_last = x.dim(d - 1);
    std::vector<std::size_t> slice_dims(x.dims().begin(), x.dims().end() - 1);
    tucker::DenseTensor slice(slice_dims);
    const std::size_t slab = slice.size();
    for (std::size_t i = 0; i < n_last; ++i) {
      std::memcpy(slice.data(), x.data() + i * slab, slab * sizeof(double));
      const fs::path p = fs::path(a.slices_dir) / tucker::slice_filename(i);
      tucker::write_tensor(p.string(), slice);
    }
    tucker::log::info("wrote {} slice files under {}", n_last, a.slices_dir);
  }
  return 0;
}

// ------------------------------------------------------------- compress ----

struct CompressArgs {
  std::string in;
  double tau = 0.0;
  std::string out_model;
  std::string metrics_csv;
};

int run_compress(const CompressArgs& a) {
  const Clock::time_point t0 = Clock::now();
  tucker::DenseTensor x = tucker::read_tensor(a.in);
  const double norm = tucker::frobenius_norm(x);
  tucker::SthosvdResult result = tucker::sthosvd(x, a.tau);
  const double wall = ms_since(t0);
  tucker::save_model(a.out_model, result.model);

  const double rel_error =
      norm > 0.0 ? std::sqrt(std::max(result.discarded_sq, 0.0)) / norm : 0.0;
  tucker::log::info("compressed {} -> ranks {} rel_error {:.3e} in {:.1f} ms",
                    a.in, join_sizes(result.model.core.dims(), 'x'), rel_error,
                    wall);
  if (!a.metrics_csv.empty()) {
    tucker::MetricsCsv csv(a.metrics_csv);
    csv.write_row("sthosvd", a.tau, result.model.core.dims(),
                  tucker::AllocationTracker::peak_bytes(), wall, rel_error);
  }
  return 0;
}

// --------------------------------------------------------------- stream ----

struct StreamArgs {
  std::string slices_dir;
  double tau = 0.0;
  bool tau_given = false;
  std::size_t init_slices = 0;
  bool init_given = false;
  std::string out_model;
  std::string metrics_csv;
  std::size_t checkpoint_every = 0;
  std::string resume;
};

std::size_t count_slice_files(const std::string& dir) {
  std::size_t n = 0;
  while (fs::exists(fs::path(dir) / tucker::slice_filename(n))) ++n;
  return n;
}

std::string slice_path(const std::string& dir, std::size_t i) {
  return (fs::path(dir) / tucker::slice_filename(i)).string();
}

/// Read slices [0, k) and stack them along a new last mode.
tucker::DenseTensor stack_initial_slices(const std::string& dir,
                                         std::size_t k) {
  tucker::DenseTensor first = tucker::read_tensor(slice_path(dir, 0));
  std::vector<std::size_t> dims = first.dims();
  dims.push_back(k);
  tucker::DenseTensor stacked(dims);
  const std::size_t slab = first.size();
  std::memcpy(stacked.data(), first.data(), slab * sizeof(double));
  for (std::size_t i = 1; i < k; ++i) {
    const std::string p = slice_path(dir, i);
    tucker::DenseTensor s = tucker::read_tensor(p);
    if (s.dims() != first.dims())
      throw tucker::IoError(tucker::IoStatus::shape_mismatch, p,
                            "slice shape differs from the first slice");
    std::memcpy(stacked.data() + i * slab, s.data(), slab * sizeof(double));
  }
  return stacked;
}

int run_stream(const StreamArgs& a) {
  const std::size_t total = count_slice_files(a.slices_dir);
  if (total == 0)
    throw std::invalid_argument(
        fmt::format("no slice files (slice_000000, ...) under {}",
                    a.slices_dir));

  tucker::StreamingState state;
  std::size_t start = 0;
  if (!a.resume.empty()) {
    if (a.init_given)
      throw std::invalid_argument("--init-slices cannot be combined with "
                                  "--resume (the checkpoint fixes the start)");
    if (a.tau_given)
      throw std::invalid_argument(
          "--tau cannot be combined with --resume (the checkpoint fixes it)");
    state = tucker::from_checkpoint(tucker::load_checkpoint(a.resume));
    start = state.n_d;
    if (start > total)
      throw std::invalid_argument(
          fmt::format("checkpoint already covers {} slices but only {} are "
                      "present",
                      start, total));
    tucker::log::info("resumed at slice {} of {} (ranks {})", start, total,
                      join_sizes(state.model.core.dims(), 'x'));
  } else {
    if (!a.tau_given)
      throw std::invalid_argument("--tau is required unless resuming");
    if (!a.init_given)
      throw std::invalid_argument("--init-slices is required unless resuming");
    if (a.init_slices == 0)
      throw std::invalid_argument("--init-slices must be at least 1");
    if (a.init_slices > total)
      throw std::invalid_argument(
          fmt::format("--init-slices {} exceeds the {} slice files present",
                      a.init_slices, total));
    tucker::DenseTensor init = stack_initial_slices(a.slices_dir,
                                                    a.init_slices);
    state = tucker::stream_init(init, a.tau);
    start = a.init_slices;
  }

  std::unique_ptr<tucker::MetricsCsv> csv;
  if (!a.metrics_csv.empty())
    csv = std::make_unique<tucker::MetricsCsv>(a.metrics_csv);

  for (std::size_t i = start; i < total; ++i) {
    const std::string p = slice_path(a.slices_dir, i);
    tucker::DenseTensor y = tucker::read_tensor(p);
    tucker::stream_update(state, y);
    if (csv) {
      const tucker::SliceMetrics& m = state.metrics.steps.back();
      csv->write_row("streaming", state.tau, m.ranks, m.peak_bytes, m.wall_ms,
                     m.error_estimate);
    }
    if (a.checkpoint_every > 0 && (i + 1) % a.checkpoint_every == 0 &&
        i + 1 < total)
      tucker::save_checkpoint(a.out_model, state);
  }

  tucker::save_checkpoint(a.out_model, state);
  tucker::log::info(
      "stream finished: {} slices, ranks {}, estimated rel error {:.3e}",
      state.n_d, join_sizes(state.model.core.dims(), 'x'),
      tucker::estimate_relative_error(state));
  return 0;
}

// ---------------------------------------------------- reconstruct / diff ---

int run_reconstruct(const std::string& model_path, const std::string& out) {
  const tucker::CheckpointData data = tucker::load_checkpoint(model_path);
  tucker::DenseTensor x = tucker::reconstruct(data.full_model());
  tucker::write_tensor(out, x);
  tucker::log::info("reconstructed {} -> {} ({} doubles)", model_path, out,
                    x.size());
  return 0;
}

int run_diff(const std::string& path_a, const std::string& path_b) {
  tucker::DenseTensor a = tucker::read_tensor(path_a);
  tucker::DenseTensor b = tucker::read_tensor(path_b);
  if (a.dims() != b.dims())
    throw std::invalid_argument(
        fmt::format("tensor shapes differ: {} vs {}",
                    join_sizes(a.dims(), 'x'), join_sizes(b.dims(), 'x')));
  const double norm_a = tucker::frobenius_norm(a);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  const double norm_diff = tucker::frobenius_norm(a);
  if (norm_a == 0.0 && norm_diff != 0.0)
    throw std::invalid_argument(
        "reference tensor --a is zero; relative error undefined");
  std::cout << fmt::format("{:.12e}", norm_a == 0.0 ? 0.0
                                                    : norm_diff / norm_a)
            << '\n';
  return 0;
}

int map_exit_code(const tucker::IoError& e) {
  switch (e.status()) {
    case tucker::IoStatus::bad_magic: return 3;
    case tucker::IoStatus::bad_version: return 4;
    case tucker::IoStatus::truncated: return 5;
    case tucker::IoStatus::shape_mismatch: return 6;
    case tucker::IoStatus::io_failure: return 7;
    case tucker::IoStatus::ok: break;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  tucker::log::init_from_env();

  CLI::App app{"Batch and streaming Tucker compression of dense tensors"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "Generate a noisy sine-wave test tensor");
  cmd_synth->add_option("--dims", synth.dims, "Mode sizes N1,...,Nd")
      ->required()
      ->delimiter(',');
  cmd_synth
      ->add_option("--bandwidths", synth.bandwidths,
                   "Frequency bandwidths J1,...,Jd (rank 2Jk+1 per mode)")
      ->required()
      ->delimiter(',');
  cmd_synth->add_option("--eta", synth.eta,
                        "Relative noise level per last-mode slice");
  cmd_synth->add_option("--seed", synth.seed, "RNG seed");
  cmd_synth->add_option("--out", synth.out, "Write the full tensor here");
  cmd_synth->add_option("--slices-dir", synth.slices_dir,
                        "Also write one (d-1)-way file per last-mode index");

  CompressArgs compress;
  CLI::App* cmd_compress =
      app.add_subcommand("compress", "Batch-compress a tensor file");
  cmd_compress->add_option("--in", compress.in, "Input tensor file")
      ->required();
  cmd_compress
      ->add_option("--tau", compress.tau, "Relative error tolerance in (0,1)")
      ->required();
  cmd_compress->add_option("--out-model", compress.out_model,
                           "Output model file")
      ->required();
  cmd_compress->add_option("--metrics-csv", compress.metrics_csv,
                           "Append one metrics row here ('-' for stdout)");

  StreamArgs stream;
  CLI::App* cmd_stream = app.add_subcommand(
      "stream", "Compress a directory of slice files incrementally");
  cmd_stream
      ->add_option("--slices-dir", stream.slices_dir,
                   "Directory of slice_000000... files")
      ->required();
  CLI::Option* tau_opt = cmd_stream->add_option(
      "--tau", stream.tau, "Relative error tolerance in (0,1)");
  CLI::Option* init_opt = cmd_stream->add_option(
      "--init-slices", stream.init_slices,
      "Number of leading slices compressed as the initial batch");
  cmd_stream
      ->add_option("--out-model", stream.out_model,
                   "Checkpoint/model output file")
      ->required();
  cmd_stream->add_option("--metrics-csv", stream.metrics_csv,
                         "Append one metrics row per slice ('-' for stdout)");
  cmd_stream->add_option("--checkpoint-every", stream.checkpoint_every,
                         "Save a checkpoint every N slices (0 = only at end)");
  cmd_stream->add_option("--resume", stream.resume,
                         "Resume from this checkpoint file");

  std::string recon_model, recon_out;
  CLI::App* cmd_recon = app.add_subcommand(
      "reconstruct", "Expand a model file back into a dense tensor file");
  cmd_recon->add_option("--model", recon_model, "Model/checkpoint file")
      ->required();
  cmd_recon->add_option("--out", recon_out, "Output tensor file")->required();

  std::string diff_a, diff_b;
  CLI::App* cmd_diff = app.add_subcommand(
      "diff", "Print the relative Frobenius difference of two tensor files");
  cmd_diff->add_option("--a", diff_a, "Reference tensor file")->required();
  cmd_diff->add_option("--b", diff_b, "Comparison tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_compress->parsed()) return run_compress(compress);
    if (cmd_stream->parsed()) {
      stream.tau_given = tau_opt->count() > 0;
      stream.init_given = init_opt->count() > 0;
      return run_stream(stream);
    }
    if (cmd_recon->parsed()) return run_reconstruct(recon_model, recon_out);
    if (cmd_diff->parsed()) return run_diff(diff_a, diff_b);
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const tucker::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return map_exit_code(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
