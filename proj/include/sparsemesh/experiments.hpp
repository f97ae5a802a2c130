// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Problem generation, recovery metrics, paired Monte-Carlo runs, the DCT
// image pipeline and result export.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsemesh/algorithms.hpp"
#include "sparsemesh/network.hpp"
#include "sparsemesh/sparse_core.hpp"

namespace sparsemesh {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

struct ExperimentConfig {
  std::size_t L = 20;
  /// One entry for a common M, or one per node.
  std::vector<std::size_t> M{100};
  std::size_t N = 500;
  std::size_t s = 20;
  std::optional<std::size_t> s_assumed;
  /// SNR sweep in dB; nullopt is the noiseless case.
  std::vector<std::optional<double>> snr_db{std::nullopt};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t topology_degree = 3;
  /// "right" or "doubly" for a generated matrix, "fixture-right" or
  /// "fixture-doubly" for the bundled 20-node matrices, or a file path.
  std::string h_kind = "fixture-doubly";
  std::vector<Algorithm> algorithms{Algorithm::kHtp, Algorithm::kDhtp, Algorithm::kDihat};
  std::size_t max_iters = 30;
  std::optional<std::size_t> support_stall = 2;
  std::size_t threads = 1;

  std::size_t rows(std::size_t node) const { return M.size() == 1 ? M.front() : M.at(node); }
  std::size_t effective_s() const { return s_assumed.value_or(s); }
  void check() const;
};

struct Problem {
  SparseVector truth;
  std::vector<NodeData> nodes;
  Vector noise_norms;  // ||e_l||
};

/// A_l ~ N(0, 1/M_l) entrywise, uniform support, N(0, 1) nonzeros, noise
/// variance s 10^(-snr/10) / M_l so the SNR holds in expectation.
Problem gen_problem(const ExperimentConfig& config, std::optional<double> snr_db, std::uint64_t seed);

/// Network matrix for an h_kind value (see ExperimentConfig::h_kind).
NetworkMatrix build_network(std::string_view h_kind, std::size_t nodes, std::size_t degree, std::uint64_t seed);
NetworkMatrix build_network(const ExperimentConfig& config);

/// Relative error energy at or below this is treated as exact recovery.
inline constexpr double kExactEnergyFloor = 1e-24;

/// 10 log10 of (1/L) sum_l E||x||^2 / E||x - x_l||^2 with expectations as
/// trial means. Returns +inf when a node's mean error energy is zero.
/// node_error_energy[t][l] = ||x - x_hat_l||^2 in trial t.
double msenr_db(std::span<const double> signal_energy, std::span<const Vector> node_error_energy);

/// Fraction of true entries.
double pse_probability(const std::vector<bool>& trial_exact);

/// Every node's support equals the support of the truth.
bool all_supports_exact(std::span<const SparseVector> estimates, const SparseVector& truth);

/// 10 log10(||x||_inf^2 / ||x - x_hat||^2); +inf on exact reconstruction.
double psnr(std::span<const double> original, std::span<const double> reconstructed);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double signal_energy = 0.0;
  Vector node_error_energy;
  bool exact_support = false;
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::kNone;
  std::size_t payload_scalars = 0;
  double consensus_gap = 0.0;
};

struct AlgorithmResult {
  Algorithm algorithm = Algorithm::kDhtp;
  std::optional<double> snr_db;
  std::size_t s = 0;
  std::size_t s_assumed = 0;
  std::size_t trials = 0;
  double msenr_db = 0.0;
  double pse = 0.0;
  double mean_iters = 0.0;
  double mean_payload_scalars = 0.0;
  std::size_t failures = 0;
  std::vector<TrialRecord> records;
};

struct ExperimentResult {
  std::vector<AlgorithmResult> rows;  // one per (snr, algorithm), in config order
};

/// Called per trial and algorithm with the full trace, from worker threads.
using TraceSink = std::function<void(Algorithm, std::optional<double> snr_db, std::size_t trial,
                                     const IterationTrace&, const SparseVector& truth)>;

/// All configured algorithms on the same instances for one SNR value.
std::vector<AlgorithmResult> run_monte_carlo(const ExperimentConfig& config, const NetworkMatrix& h,
                                             std::optional<double> snr_db, const TraceSink& sink = {});

/// run_monte_carlo over every configured SNR.
ExperimentResult run_experiment(const ExperimentConfig& config, const TraceSink& sink = {});

// Config files: "key = value" lines, '#' or ';' comments, [section] headers
// ignored. Keys are the ExperimentConfig field names.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
std::vector<std::optional<double>> parse_snr_list(std::string_view text);

enum class ResultFormat { kCsv, kJsonLines };

/// algorithm,snr_db,s,s_assumed,trials,msenr_db,pse,mean_iters,mean_payload_scalars,failures
void write_results_csv(const ExperimentResult& result, std::ostream& out);
void write_results_jsonl(const ExperimentResult& result, std::ostream& out);
void export_results(const ExperimentResult& result, const std::filesystem::path& path, ResultFormat format);

/// Inverse of the writers; per-trial records are not serialized.
ExperimentResult parse_results_csv(std::istream& in);
ExperimentResult parse_results_jsonl(std::istream& in);

/// %.12g, with "inf", "-inf" and "nan" spelled out.
std::string format_real(double v);

// ---- images ----

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  Vector as_doubles() const;
};

GrayImage read_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(std::string_view bytes);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Deterministic 8-bit test scene: smooth gradients, a disc, bars and mild texture.
GrayImage synthetic_image(std::size_t side, std::uint64_t seed);

/// Orthonormal 2-D DCT-II of an n x n row-major array, and its inverse.
Vector dct2(std::span<const double> pixels, std::size_t n);
Vector idct2(std::span<const double> coeffs, std::size_t n);

enum class Partition { kZigZag, kRaster };

/// Flat indices of an n x n array in scan order.
std::vector<std::size_t> scan_order(std::size_t n, Partition partition);

struct ImageConfig {
  std::size_t blocks = 64;
  double sparsity_fraction = 0.11;
  double measurement_ratio = 0.5;  // M = ratio * part length
  std::size_t L = 20;
  std::string h_kind = "fixture-doubly";
  std::size_t topology_degree = 3;
  Algorithm algorithm = Algorithm::kDhtp;
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  Partition partition = Partition::kZigZag;
  std::size_t max_iters = 30;
  std::size_t node = 0;  // node whose estimate is reconstructed
  std::size_t threads = 1;
};

struct ImageResult {
  GrayImage reconstruction;
  Vector reconstruction_pixels;  // before clamping and rounding
  Vector truncated_pixels;       // inverse DCT of the sparsified coefficients
  std::vector<double> block_psnr_db;
  double psnr_db = 0.0;            // reconstruction vs original, pixel domain
  double truncation_psnr_db = 0.0;  // s-term truncation vs original
  std::size_t part_length = 0;
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t failed_blocks = 0;
};

ImageResult image_pipeline(const GrayImage& image, const ImageConfig& config);

}  // namespace sparsemesh
