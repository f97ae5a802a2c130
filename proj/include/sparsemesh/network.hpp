// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Network mixing matrices H and node topologies.
//
// h(l, r) is the weight node l gives to information arriving from node r;
// h(l, r) == 0 means there is no link from r to l.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "sparsemesh/sparse_core.hpp"

namespace sparsemesh {

enum class StochasticKind { kGeneral, kRight, kDoubly };

std::string_view to_string(StochasticKind kind);

/// Tolerance for matrices transcribed with two decimals.
inline constexpr double kFixtureTolerance = 0.011;
/// Tolerance for matrices produced by this library.
inline constexpr double kProgrammaticTolerance = 1e-9;

class NetworkMatrix {
 public:
  std::size_t size() const noexcept { return h_.rows(); }
  StochasticKind kind() const noexcept { return kind_; }
  const DenseMatrix& matrix() const noexcept { return h_; }
  double operator()(std::size_t l, std::size_t r) const { return h_(l, r); }

  /// Nodes r with h(l, r) != 0 (includes l itself when h(l, l) != 0).
  std::vector<std::size_t> in_neighbors(std::size_t l) const;
  /// Number of nodes r != l that listen to l, i.e. h(r, l) != 0.
  std::size_t listeners(std::size_t l) const;

 private:
  NetworkMatrix(DenseMatrix h, StochasticKind kind) : h_(std::move(h)), kind_(kind) {}
  friend NetworkMatrix validate(const DenseMatrix&, StochasticKind, double);

  DenseMatrix h_;
  StochasticKind kind_ = StochasticKind::kGeneral;
};

/// Classifies H as the strongest kind satisfied within `tol`. Throws
/// NotNonnegativeError on a negative or non-finite entry and
/// StochasticityError when `expected` is not met.
NetworkMatrix validate(const DenseMatrix& h, StochasticKind expected = StochasticKind::kGeneral,
                       double tol = kProgrammaticTolerance);

/// Per-node neighborhoods N_l, always containing l.
class Topology {
 public:
  explicit Topology(std::vector<std::vector<std::size_t>> neighbors);

  std::size_t size() const noexcept { return neighbors_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t l) const { return neighbors_[l]; }
  bool has_edge(std::size_t l, std::size_t r) const;

  /// Adds r -> l for every l -> r.
  Topology symmetrized() const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Each node links to itself plus `extra_degree` distinct random others.
Topology generate_topology(std::size_t nodes, std::size_t extra_degree, std::uint64_t seed);

/// Topology induced by the nonzero pattern of H (self-loops added).
Topology topology_of(const NetworkMatrix& h);

/// Right-stochastic H supported on the topology. Raw weights default to
/// uniform(0, 1) draws from `seed`.
NetworkMatrix row_normalize(const Topology& topology,
                            const std::optional<DenseMatrix>& weights = std::nullopt,
                            std::uint64_t seed = 0);

/// Sinkhorn-Knopp balancing on the topology's support. Starts from all-ones
/// on the support, or from uniform(0.5, 1.5) draws when `seed` is given.
/// Throws BalancingFailed if the row/column deviation is still >= tol.
NetworkMatrix sinkhorn_balance(const Topology& topology, std::size_t max_iters = 10000,
                               double tol = 1e-12, std::optional<std::uint64_t> seed = std::nullopt);

/// Sinkhorn-Knopp balancing from a nonnegative starting matrix; keeps its
/// support.
NetworkMatrix sinkhorn_balance(DenseMatrix start, std::size_t max_iters = 10000, double tol = 1e-12);

/// w_l = sum_r h(r, l).
Vector column_weights(const NetworkMatrix& h);

/// Plain text, one row per line, '#' comments ignored. Validated with
/// kFixtureTolerance.
NetworkMatrix load_fixture(const std::filesystem::path& path,
                           StochasticKind expected = StochasticKind::kGeneral);
DenseMatrix parse_matrix_text(std::string_view text);
void save_matrix(const NetworkMatrix& h, const std::filesystem::path& path);

/// Directory holding the shipped fixtures: $SPARSEMESH_FIXTURES or the
/// source tree's fixtures/ directory.
std::filesystem::path fixture_dir();

}  // namespace sparsemesh
