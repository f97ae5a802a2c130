// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// HTP, DHTP (estimate exchange) and DiHaT (observation, system matrix and
// estimate exchange), run as synchronous rounds over a network.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsemesh/network.hpp"
#include "sparsemesh/sparse_core.hpp"

namespace sparsemesh {

struct NodeData {
  DenseMatrix a;  // M_l x N
  Vector y;       // M_l
  std::size_t node_id = 0;
};

struct StoppingCriterion {
  std::size_t max_iters = 30;
  /// Stop once every node's support has been unchanged this many rounds.
  std::optional<std::size_t> support_stall = 2;
  /// Stop once every node's ||y_l - A_l x_l|| is at or below this.
  std::optional<double> residual_tol;

  void check() const;
};

enum class StopReason { kNone, kMaxIters, kSupportStall, kResidualTol };
std::string_view to_string(StopReason reason);

enum class Algorithm { kHtp, kDhtp, kDihat };
std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// State of one node after one round.
struct NodeIterate {
  SparseVector estimate;      // x_hat_{l,k}
  SupportSet support;         // T_hat_{l,k}
  SparseVector intermediate;  // x_tilde_{l,k}
  SupportSet intermediate_support;  // T_tilde_{l,k}
  SparseVector fused;         // x_check_{l,k}
  double residual_norm = 0.0;  // ||y_l - A_l x_hat_{l,k}|| on the node's own data
  std::size_t messages_sent = 0;
  std::size_t payload_scalars = 0;
};

struct IterationTrace {
  Algorithm algorithm = Algorithm::kHtp;
  std::size_t nodes = 0;
  std::size_t dim = 0;
  bool vectors_recorded = true;
  /// rounds[k - 1][l]
  std::vector<std::vector<NodeIterate>> rounds;
  StopReason stop_reason = StopReason::kNone;
  std::vector<std::string> warnings;

  std::size_t iterations() const noexcept { return rounds.size(); }
  std::size_t total_payload_scalars() const;
  std::size_t total_messages() const;

  friend bool operator==(const IterationTrace&, const IterationTrace&);
};

struct RunOptions {
  /// Keep every per-round vector in the trace; when false only supports,
  /// residuals and counters are kept.
  bool record_vectors = true;
  std::size_t threads = 1;
};

struct RunResult {
  std::vector<SparseVector> estimates;  // one per node
  IterationTrace trace;
};

RunResult htp_run(const NodeData& node, std::size_t s, const StoppingCriterion& stop = {},
                  const RunOptions& options = {});

RunResult dhtp_run(std::span<const NodeData> nodes, const NetworkMatrix& h, std::size_t s,
                   const StoppingCriterion& stop = {}, const RunOptions& options = {});

/// Requires equal M_l at every node. A network matrix that is not doubly
/// stochastic is accepted with a warning recorded in the trace.
RunResult dihat_run(std::span<const NodeData> nodes, const NetworkMatrix& h, std::size_t s,
                    const StoppingCriterion& stop = {}, const RunOptions& options = {});

RunResult run_algorithm(Algorithm algorithm, std::span<const NodeData> nodes, const NetworkMatrix& h,
                        std::size_t s, const StoppingCriterion& stop = {}, const RunOptions& options = {});

/// sum_i weights[i] * estimates[i]
Vector fuse_estimates(std::span<const SparseVector> estimates, std::span<const double> weights);

/// Largest pairwise distance between node estimates.
double consensus_gap(std::span<const SparseVector> estimates);

/// Scalars per message: N for estimate exchange, M + M N + N for DiHaT.
std::size_t payload_per_message(Algorithm algorithm, std::size_t rows, std::size_t dim);

/// CSV: iter,node,residual_norm,support_indices,estimate_error,msgs,payload_scalars
void write_trace_csv(const IterationTrace& trace, std::ostream& out,
                     const SparseVector* truth = nullptr);

}  // namespace sparsemesh
