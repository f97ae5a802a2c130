// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"
#include "sparsemesh/kernels.hpp"
#include "sparsemesh/parallel.hpp"

namespace sparsemesh {

Vector GrayImage::as_doubles() const { return Vector(pixels.begin(), pixels.end()); }

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
  return std::string(bytes.substr(start, pos - start));
}

std::size_t header_number(std::string_view bytes, std::size_t& pos, const char* what) {
  const std::string tok = next_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
  return std::stoull(tok);
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat dct_matrix(std::size_t n) {
  Mat c(n, n);
  const double a0 = std::sqrt(1.0 / double(n));
  const double ak = std::sqrt(2.0 / double(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      c(Eigen::Index(k), Eigen::Index(i)) =
          (k == 0 ? a0 : ak) * std::cos(std::numbers::pi * double(2 * i + 1) * double(k) / double(2 * n));
    }
  }
  return c;
}

}  // namespace

GrayImage parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  if (magic != "P5") throw ParseError("unsupported image format '" + magic + "' (binary PGM P5 only)");
  GrayImage img;
  img.width = header_number(bytes, pos, "width");
  img.height = header_number(bytes, pos, "height");
  const std::size_t maxval = header_number(bytes, pos, "maxval");
  if (maxval == 0 || maxval > 255) throw ParseError("PGM: only 8-bit images are supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError("PGM: truncated header");
  }
  ++pos;
  const std::size_t count = img.width * img.height;
  if (bytes.size() - pos < count) throw ParseError("PGM: truncated pixel data");
  img.pixels.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(pos + count));
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pgm(ss.str());
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.width * image.height) throw InvalidArgument("image size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), std::streamsize(image.pixels.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

GrayImage synthetic_image(std::size_t side, std::uint64_t seed) {
  GrayImage img{side, side, std::vector<std::uint8_t>(side * side)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-4.0, 4.0);
  const double n = double(side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double x = double(c) / n;
      const double y = double(r) / n;
      double v = 110.0 + 50.0 * std::sin(2.0 * std::numbers::pi * 1.5 * x) * std::cos(2.0 * std::numbers::pi * y);
      const double dx = x - 0.35, dy = y - 0.4;
      if (dx * dx + dy * dy < 0.04) v += 60.0;
      if (x > 0.6 && y > 0.6 && int(x * 24.0) % 2 == 0) v -= 45.0;
      v += jitter(rng);
      img.pixels[r * side + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

Vector dct2(std::span<const double> pixels, std::size_t n) {
  if (pixels.size() != n * n) throw InvalidArgument("dct2: expected an n x n array");
  const Mat c = dct_matrix(n);
  const Eigen::Map<const Mat> x(pixels.data(), Eigen::Index(n), Eigen::Index(n));
  const Mat y = c * x * c.transpose();
  return Vector(y.data(), y.data() + n * n);
}

Vector idct2(std::span<const double> coeffs, std::size_t n) {
  if (coeffs.size() != n * n) throw InvalidArgument("idct2: expected an n x n array");
  const Mat c = dct_matrix(n);
  const Eigen::Map<const Mat> y(coeffs.data(), Eigen::Index(n), Eigen::Index(n));
  const Mat x = c.transpose() * y * c;
  return Vector(x.data(), x.data() + n * n);
}

std::vector<std::size_t> scan_order(std::size_t n, Partition partition) {
  std::vector<std::size_t> order;
  order.reserve(n * n);
  if (partition == Partition::kRaster) {
    for (std::size_t i = 0; i < n * n; ++i) order.push_back(i);
    return order;
  }
  for (std::size_t d = 0; d + 1 < 2 * n; ++d) {
    const std::size_t lo = d < n ? 0 : d - n + 1;
    const std::size_t hi = std::min(d, n - 1);
    if (d % 2 == 0) {
      for (std::size_t i = hi + 1; i-- > lo;) order.push_back(i * n + (d - i));
    } else {
      for (std::size_t i = lo; i <= hi; ++i) order.push_back(i * n + (d - i));
    }
  }
  return order;
}

ImageResult image_pipeline(const GrayImage& image, const ImageConfig& config) {
  if (image.width != image.height) throw InvalidArgument("image must be square");
  if (image.pixels.size() != image.width * image.height) throw InvalidArgument("image size mismatch");
  const std::size_t n = image.width;
  if (config.blocks == 0 || (n * n) % config.blocks != 0) {
    throw InvalidArgument("pixel count " + std::to_string(n * n) + " is not divisible into " +
                          std::to_string(config.blocks) + " blocks");
  }
  if (!(config.sparsity_fraction > 0.0 && config.sparsity_fraction <= 1.0)) {
    throw InvalidArgument("sparsity fraction must be in (0, 1]");
  }
  if (config.node >= config.L) throw InvalidArgument("reconstruction node out of range");

  ImageResult out;
  out.part_length = n * n / config.blocks;
  out.s = static_cast<std::size_t>(std::ceil(config.sparsity_fraction * double(out.part_length) - 1e-9));
  out.m = static_cast<std::size_t>(std::lround(config.measurement_ratio * double(out.part_length)));
  if (out.m < out.s || out.m == 0) throw InvalidArgument("measurement count below sparsity");

  const Vector original = image.as_doubles();
  const Vector coeffs = dct2(original, n);
  const auto order = scan_order(n, config.partition);
  const NetworkMatrix h = build_network(config.h_kind, config.L, config.topology_degree, config.seed);

  Vector truth_coeffs(n * n, 0.0);
  Vector est_coeffs(n * n, 0.0);
  out.block_psnr_db.assign(config.blocks, 0.0);
  std::vector<char> failed(config.blocks, 0);
  StoppingCriterion stop;
  stop.max_iters = config.max_iters;
  RunOptions options;
  options.record_vectors = false;

  parallel_for(config.blocks, config.threads, [&](std::size_t b) {
    const std::size_t p = out.part_length;
    Vector block(p);
    for (std::size_t i = 0; i < p; ++i) block[i] = coeffs[order[b * p + i]];
    const SparseVector truth = hard_threshold(block, out.s);

    std::mt19937_64 rng(trial_seed(config.seed, b));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double signal = truth.norm() * truth.norm();
    std::vector<NodeData> nodes;
    nodes.reserve(config.L);
    for (std::size_t l = 0; l < config.L; ++l) {
      Vector data(out.m * p);
      const double scale = 1.0 / std::sqrt(double(out.m));
      for (double& v : data) v = scale * gauss(rng);
      NodeData node{DenseMatrix(out.m, p, std::move(data)), Vector(out.m, 0.0), l};
      simd::gemv(node.a.data(), out.m, p, truth.view(), node.y);
      if (config.snr_db) {
        const double sigma = std::sqrt(signal * std::pow(10.0, -*config.snr_db / 10.0) / double(out.m));
        for (double& v : node.y) v += sigma * gauss(rng);
      }
      nodes.push_back(std::move(node));
    }
    SparseVector estimate(p);
    try {
      estimate = run_algorithm(config.algorithm, nodes, h, out.s, stop, options).estimates[config.node];
    } catch (const std::exception&) {
      failed[b] = 1;
    }
    out.block_psnr_db[b] = psnr(truth.view(), estimate.view());
    for (std::size_t i = 0; i < p; ++i) {
      truth_coeffs[order[b * p + i]] = truth[i];
      est_coeffs[order[b * p + i]] = estimate[i];
    }
  });
  out.failed_blocks = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));

  out.truncated_pixels = idct2(truth_coeffs, n);
  out.reconstruction_pixels = idct2(est_coeffs, n);
  out.truncation_psnr_db = psnr(original, out.truncated_pixels);
  out.psnr_db = psnr(original, out.reconstruction_pixels);
  out.reconstruction = GrayImage{n, n, std::vector<std::uint8_t>(n * n)};
  for (std::size_t i = 0; i < n * n; ++i) {
    out.reconstruction.pixels[i] =
        static_cast<std::uint8_t>(std::clamp(std::lround(out.reconstruction_pixels[i]), 0L, 255L));
  }
  return out;
}

}  // namespace sparsemesh
