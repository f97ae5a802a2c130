// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparsemesh/algorithms.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/kernels.hpp"
#include "sparsemesh/parallel.hpp"

namespace sparsemesh {

void StoppingCriterion::check() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
  if (support_stall && *support_stall < 1) throw InvalidArgument("support_stall must be at least 1");
  if (residual_tol && !(*residual_tol >= 0.0)) throw InvalidArgument("residual_tol must be nonnegative");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIters: return "max_iters";
    case StopReason::kSupportStall: return "support_stall";
    case StopReason::kResidualTol: return "residual_tol";
    case StopReason::kNone: return "none";
  }
  return "none";
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kHtp: return "htp";
    case Algorithm::kDhtp: return "dhtp";
    case Algorithm::kDihat: return "dihat";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "htp") return Algorithm::kHtp;
  if (name == "dhtp") return Algorithm::kDhtp;
  if (name == "dihat") return Algorithm::kDihat;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

std::size_t IterationTrace::total_payload_scalars() const {
  std::size_t total = 0;
  for (const auto& round : rounds) {
    for (const auto& it : round) total += it.payload_scalars;
  }
  return total;
}

std::size_t IterationTrace::total_messages() const {
  std::size_t total = 0;
  for (const auto& round : rounds) {
    for (const auto& it : round) total += it.messages_sent;
  }
  return total;
}

namespace {

bool same_iterate(const NodeIterate& a, const NodeIterate& b) {
  return a.estimate == b.estimate && a.support == b.support && a.intermediate == b.intermediate &&
         a.intermediate_support == b.intermediate_support && a.fused == b.fused &&
         a.residual_norm == b.residual_norm && a.messages_sent == b.messages_sent &&
         a.payload_scalars == b.payload_scalars;
}

}  // namespace

// Equality of everything a round produced; the algorithm tag is ignored so a
// degenerate DHTP run can be compared against HTP.
bool operator==(const IterationTrace& a, const IterationTrace& b) {
  if (a.nodes != b.nodes || a.dim != b.dim || a.rounds.size() != b.rounds.size() ||
      a.stop_reason != b.stop_reason) {
    return false;
  }
  for (std::size_t k = 0; k < a.rounds.size(); ++k) {
    if (a.rounds[k].size() != b.rounds[k].size()) return false;
    for (std::size_t l = 0; l < a.rounds[k].size(); ++l) {
      if (!same_iterate(a.rounds[k][l], b.rounds[k][l])) return false;
    }
  }
  return true;
}

std::size_t payload_per_message(Algorithm algorithm, std::size_t rows, std::size_t dim) {
  switch (algorithm) {
    case Algorithm::kHtp: return 0;
    case Algorithm::kDhtp: return dim;
    case Algorithm::kDihat: return rows + rows * dim + dim;
  }
  return 0;
}

Vector fuse_estimates(std::span<const SparseVector> estimates, std::span<const double> weights) {
  if (estimates.size() != weights.size()) throw InvalidArgument("estimate and weight counts differ");
  if (estimates.empty()) throw InvalidArgument("nothing to fuse");
  const std::size_t n = estimates.front().dim();
  Vector out(n, 0.0);
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].dim() != n) throw InvalidArgument("estimates have different dimensions");
    if (!(weights[i] >= 0.0)) throw InvalidArgument("fusion weights must be nonnegative");
    simd::axpy(weights[i], estimates[i].view(), out);
  }
  return out;
}

double consensus_gap(std::span<const SparseVector> estimates) {
  double gap = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < estimates.size(); ++j) {
      gap = std::max(gap, distance(estimates[i].view(), estimates[j].view()));
    }
  }
  return gap;
}

namespace {

void check_nodes(std::span<const NodeData> nodes, std::size_t s) {
  if (nodes.empty()) throw InvalidArgument("no nodes");
  const std::size_t n = nodes.front().a.cols();
  for (const auto& node : nodes) {
    if (node.a.cols() != n) throw InvalidArgument("nodes disagree on the signal dimension");
    if (node.a.rows() != node.y.size()) {
      throw InvalidArgument("node " + std::to_string(node.node_id) + ": rows(A) != dim(y)");
    }
    for (double v : node.y) {
      if (!std::isfinite(v)) throw NumericError("non-finite observation at node " + std::to_string(node.node_id));
    }
    if (s > node.a.rows() || s > n) {
      throw InvalidArgument("sparsity " + std::to_string(s) + " exceeds min(M, N) at node " +
                            std::to_string(node.node_id));
    }
  }
}

// Shared synchronous-round driver. Phase one computes every node's
// intermediate estimate; phase two fuses neighbors' intermediates from the
// same round.
RunResult run_rounds(Algorithm algorithm, std::span<const NodeData> nodes, const NetworkMatrix* h,
                     std::size_t s, const StoppingCriterion& stop, const RunOptions& options) {
  stop.check();
  check_nodes(nodes, s);
  const std::size_t num_nodes = nodes.size();
  const std::size_t dim = nodes.front().a.cols();
  if (h && h->size() != num_nodes) {
    throw InvalidArgument("network matrix is " + std::to_string(h->size()) + "x" + std::to_string(h->size()) +
                          " but there are " + std::to_string(num_nodes) + " nodes");
  }

  RunResult result;
  result.trace.algorithm = algorithm;
  result.trace.nodes = num_nodes;
  result.trace.dim = dim;
  result.trace.vectors_recorded = options.record_vectors;
  result.estimates.assign(num_nodes, SparseVector(dim));

  // Mixed observations and system matrices (DiHaT only).
  std::vector<DenseMatrix> mixed_a;
  std::vector<Vector> mixed_y;
  if (algorithm == Algorithm::kDihat) {
    const std::size_t m = nodes.front().a.rows();
    for (const auto& node : nodes) {
      if (node.a.rows() != m) throw InvalidArgument("DiHaT requires the same number of observations at every node");
    }
    if (h->kind() != StochasticKind::kDoubly) {
      result.trace.warnings.push_back("DiHaT run with a " + std::string(to_string(h->kind())) +
                                      " network matrix; doubly stochastic expected");
    }
    for (const auto& node : nodes) {
      mixed_a.push_back(node.a);
      mixed_y.push_back(node.y);
    }
  }

  if (s == 0) {
    result.trace.stop_reason = StopReason::kMaxIters;
    return result;
  }

  std::vector<std::vector<std::size_t>> in_nbrs(num_nodes);
  std::vector<std::size_t> messages(num_nodes, 0);
  for (std::size_t l = 0; l < num_nodes; ++l) {
    if (h) {
      in_nbrs[l] = h->in_neighbors(l);
      messages[l] = h->listeners(l);
    } else {
      in_nbrs[l] = {l};
    }
  }

  std::vector<SupportSet> previous_supports(num_nodes, SupportSet({}, dim));
  std::size_t stall = 0;
  std::vector<SparseVector> intermediates(num_nodes);
  std::vector<SupportSet> intermediate_supports(num_nodes);
  std::vector<DenseMatrix> next_a;
  std::vector<Vector> next_y;

  for (std::size_t k = 1; k <= stop.max_iters; ++k) {
    if (algorithm == Algorithm::kDihat) {
      next_a = mixed_a;
      next_y = mixed_y;
      parallel_for(num_nodes, options.threads, [&](std::size_t l) {
        std::span<double> acc_a = next_a[l].data();
        Vector& acc_y = next_y[l];
        std::fill(acc_a.begin(), acc_a.end(), 0.0);
        std::fill(acc_y.begin(), acc_y.end(), 0.0);
        for (std::size_t r : in_nbrs[l]) {
          const double w = (*h)(l, r);
          simd::axpy(w, mixed_a[r].data(), acc_a);
          simd::axpy(w, mixed_y[r], acc_y);
        }
      });
      std::swap(mixed_a, next_a);
      std::swap(mixed_y, next_y);
    }

    // Phase one: gradient support step and least squares on that support.
    parallel_for(num_nodes, options.threads, [&](std::size_t l) {
      const DenseMatrix& a = algorithm == Algorithm::kDihat ? mixed_a[l] : nodes[l].a;
      const Vector& y = algorithm == Algorithm::kDihat ? mixed_y[l] : nodes[l].y;
      SupportSet t = gradient_support_step(a, y, result.estimates[l].view(), s);
      try {
        intermediates[l] = least_squares_on_support(a, y, t);
      } catch (const SingularSystemError& e) {
        throw SingularSystemError(std::string(e.what()) + " at node " + std::to_string(l) + ", iteration " +
                                      std::to_string(k),
                                  e.support());
      }
      intermediate_supports[l] = std::move(t);
    });

    // Phase two: fuse neighbors' intermediates, prune to s entries.
    std::vector<NodeIterate> round(num_nodes);
    parallel_for(num_nodes, options.threads, [&](std::size_t l) {
      NodeIterate& it = round[l];
      if (algorithm == Algorithm::kHtp) {
        it.fused = intermediates[l];
        it.support = intermediate_supports[l];
        it.estimate = intermediates[l];
      } else {
        std::vector<SparseVector> parts;
        std::vector<double> weights;
        parts.reserve(in_nbrs[l].size());
        for (std::size_t r : in_nbrs[l]) {
          parts.push_back(intermediates[r]);
          weights.push_back((*h)(l, r));
        }
        it.fused = SparseVector(fuse_estimates(parts, weights));
        it.support = supp_top_k(it.fused.view(), s);
        it.estimate = restrict_to(it.fused.view(), it.support);
      }
      it.intermediate = intermediates[l];
      it.intermediate_support = intermediate_supports[l];
      it.residual_norm = norm2(residual(nodes[l].a, nodes[l].y, it.estimate.view()));
      it.messages_sent = messages[l];
      it.payload_scalars = messages[l] * payload_per_message(algorithm, nodes[l].a.rows(), dim);
    });

    bool unchanged = true;
    bool residual_met = stop.residual_tol.has_value();
    for (std::size_t l = 0; l < num_nodes; ++l) {
      result.estimates[l] = round[l].estimate;
      if (!(round[l].support == previous_supports[l])) unchanged = false;
      previous_supports[l] = round[l].support;
      if (stop.residual_tol && round[l].residual_norm > *stop.residual_tol) residual_met = false;
      if (!options.record_vectors) {
        round[l].estimate = SparseVector();
        round[l].intermediate = SparseVector();
        round[l].fused = SparseVector();
      }
    }
    result.trace.rounds.push_back(std::move(round));
    stall = unchanged ? stall + 1 : 0;

    if (residual_met) {
      result.trace.stop_reason = StopReason::kResidualTol;
      break;
    }
    if (stop.support_stall && stall >= *stop.support_stall) {
      result.trace.stop_reason = StopReason::kSupportStall;
      break;
    }
    if (k == stop.max_iters) result.trace.stop_reason = StopReason::kMaxIters;
  }
  return result;
}

}  // namespace

RunResult htp_run(const NodeData& node, std::size_t s, const StoppingCriterion& stop, const RunOptions& options) {
  return run_rounds(Algorithm::kHtp, std::span<const NodeData>(&node, 1), nullptr, s, stop, options);
}

RunResult dhtp_run(std::span<const NodeData> nodes, const NetworkMatrix& h, std::size_t s,
                   const StoppingCriterion& stop, const RunOptions& options) {
  return run_rounds(Algorithm::kDhtp, nodes, &h, s, stop, options);
}

RunResult dihat_run(std::span<const NodeData> nodes, const NetworkMatrix& h, std::size_t s,
                    const StoppingCriterion& stop, const RunOptions& options) {
  return run_rounds(Algorithm::kDihat, nodes, &h, s, stop, options);
}

RunResult run_algorithm(Algorithm algorithm, std::span<const NodeData> nodes, const NetworkMatrix& h,
                        std::size_t s, const StoppingCriterion& stop, const RunOptions& options) {
  switch (algorithm) {
    case Algorithm::kHtp: {
      // Standalone HTP at every node, no exchange.
      RunResult out;
      out.trace.algorithm = Algorithm::kHtp;
      out.trace.nodes = nodes.size();
      out.trace.dim = nodes.empty() ? 0 : nodes.front().a.cols();
      out.trace.vectors_recorded = options.record_vectors;
      std::vector<RunResult> per_node(nodes.size());
      parallel_for(nodes.size(), options.threads, [&](std::size_t l) {
        RunOptions single = options;
        single.threads = 1;
        per_node[l] = htp_run(nodes[l], s, stop, single);
      });
      std::size_t longest = 0;
      for (const auto& r : per_node) longest = std::max(longest, r.trace.iterations());
      out.trace.rounds.resize(longest);
      out.trace.stop_reason = StopReason::kMaxIters;
      for (std::size_t l = 0; l < nodes.size(); ++l) {
        out.estimates.push_back(per_node[l].estimates.front());
        const auto& rounds = per_node[l].trace.rounds;
        for (std::size_t k = 0; k < longest; ++k) {
          // Nodes that stopped early hold their last iterate.
          out.trace.rounds[k].push_back(rounds.empty() ? NodeIterate{} : rounds[std::min(k, rounds.size() - 1)].front());
        }
      }
      if (!per_node.empty()) {
        bool all_stalled = true;
        for (const auto& r : per_node) all_stalled &= r.trace.stop_reason == StopReason::kSupportStall;
        if (all_stalled) out.trace.stop_reason = StopReason::kSupportStall;
      }
      return out;
    }
    case Algorithm::kDhtp: return dhtp_run(nodes, h, s, stop, options);
    case Algorithm::kDihat: return dihat_run(nodes, h, s, stop, options);
  }
  throw InvalidArgument("unknown algorithm");
}

void write_trace_csv(const IterationTrace& trace, std::ostream& out, const SparseVector* truth) {
  out << "iter,node,residual_norm,support_indices,estimate_error,msgs,payload_scalars\n";
  out << std::setprecision(12);
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    for (std::size_t l = 0; l < trace.rounds[k].size(); ++l) {
      const NodeIterate& it = trace.rounds[k][l];
      out << (k + 1) << ',' << l << ',' << it.residual_norm << ',';
      bool first = true;
      for (std::size_t i : it.support) {
        out << (first ? "" : ";") << i;
        first = false;
      }
      out << ',';
      if (truth && it.estimate.dim() == truth->dim()) out << distance(it.estimate.view(), truth->view());
      out << ',' << it.messages_sent << ',' << it.payload_scalars << '\n';
    }
  }
}

}  // namespace sparsemesh
