// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"
#include "sparsemesh/kernels.hpp"

namespace sparsemesh {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return mix_seed(mix_seed(master) + trial);
}

void ExperimentConfig::check() const {
  if (L == 0) throw InvalidArgument("L must be at least 1");
  if (M.empty()) throw InvalidArgument("M must be given");
  if (M.size() != 1 && M.size() != L) {
    throw InvalidArgument("M lists " + std::to_string(M.size()) + " values for " + std::to_string(L) + " nodes");
  }
  if (N == 0) throw InvalidArgument("N must be at least 1");
  const std::size_t m_min = *std::min_element(M.begin(), M.end());
  if (s > N) throw InvalidArgument("s exceeds N");
  if (s > m_min) throw InvalidArgument("s exceeds the smallest M_l");
  if (effective_s() > N || effective_s() > m_min) throw InvalidArgument("s_assumed exceeds N or the smallest M_l");
  if (trials == 0) throw InvalidArgument("trials must be at least 1");
  if (snr_db.empty()) throw InvalidArgument("snr_db list is empty");
  if (algorithms.empty()) throw InvalidArgument("no algorithms selected");
  if (max_iters == 0) throw InvalidArgument("max_iters must be at least 1");
  for (const auto& snr : snr_db) {
    if (snr && !std::isfinite(*snr)) throw InvalidArgument("snr_db must be finite");
  }
}

Problem gen_problem(const ExperimentConfig& config, std::optional<double> snr_db, std::uint64_t seed) {
  config.check();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Problem p;
  p.truth = SparseVector(config.N);
  std::vector<std::size_t> idx(config.N);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < config.s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, config.N - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::sort(idx.begin(), idx.begin() + std::ptrdiff_t(config.s));
  for (std::size_t i = 0; i < config.s; ++i) p.truth[idx[i]] = gauss(rng);

  p.nodes.reserve(config.L);
  p.noise_norms.assign(config.L, 0.0);
  for (std::size_t l = 0; l < config.L; ++l) {
    const std::size_t m = config.rows(l);
    const double scale = 1.0 / std::sqrt(double(m));
    Vector data(m * config.N);
    for (double& v : data) v = scale * gauss(rng);
    NodeData node{DenseMatrix(m, config.N, std::move(data)), Vector(m, 0.0), l};
    simd::gemv(node.a.data(), m, config.N, p.truth.view(), node.y);
    if (snr_db) {
      const double sigma = std::sqrt(double(config.s) * std::pow(10.0, -*snr_db / 10.0) / double(m));
      double e2 = 0.0;
      for (double& v : node.y) {
        const double e = sigma * gauss(rng);
        v += e;
        e2 += e * e;
      }
      p.noise_norms[l] = std::sqrt(e2);
    }
    p.nodes.push_back(std::move(node));
  }
  return p;
}

NetworkMatrix build_network(std::string_view h_kind, std::size_t nodes, std::size_t degree, std::uint64_t seed) {
  if (h_kind == "right" || h_kind == "doubly") {
    const Topology topology = generate_topology(nodes, degree, mix_seed(seed ^ 0x6E6574ull));
    if (h_kind == "right") return row_normalize(topology, std::nullopt, mix_seed(seed ^ 0x726F77ull));
    return sinkhorn_balance(topology.symmetrized());
  }
  std::filesystem::path path;
  StochasticKind expected = StochasticKind::kRight;
  if (h_kind == "fixture-right") {
    path = fixture_dir() / "h_right_stochastic.txt";
  } else if (h_kind == "fixture-doubly") {
    path = fixture_dir() / "h_doubly_stochastic.txt";
    expected = StochasticKind::kDoubly;
  } else {
    path = std::filesystem::path(std::string(h_kind));
  }
  NetworkMatrix h = load_fixture(path, expected);
  if (h.size() != nodes) {
    throw InvalidArgument("network matrix " + path.string() + " has " + std::to_string(h.size()) +
                          " nodes, config has " + std::to_string(nodes));
  }
  // Shipped fixtures are printed to 2 decimals; rebalance on their support so
  // sums are exact and a consensus state is a fixed point of the fusion.
  if (h_kind == "fixture-doubly") return sinkhorn_balance(h.matrix());
  if (h_kind == "fixture-right") return row_normalize(topology_of(h), h.matrix());
  return h;
}

NetworkMatrix build_network(const ExperimentConfig& config) {
  return build_network(config.h_kind, config.L, config.topology_degree, config.seed);
}

}  // namespace sparsemesh
