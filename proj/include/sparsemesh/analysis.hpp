// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Convergence theory for estimate-exchange DHTP, made executable: exact
// restricted isometry constants on small matrices, the theorem constants, and
// empirical checks of the recurrence inequality and the final-error bounds.

#include <algorithm>
#include <cstddef>
#include <cstdint>
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

/// Largest number of supports exact_ric will enumerate.
inline constexpr std::uint64_t kRicEnumerationCap = 2'000'000;

/// Guarantee regime of the convergence theorems: delta_3s < 1/3.
inline constexpr double kGuaranteeDelta = 1.0 / 3.0;

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct RicReport {
  std::size_t order = 0;
  double delta = 0.0;
  SupportSet argmax_support;
  std::string method = "exact-enumeration";
  /// True when enumeration stopped early because delta exceeded the abort
  /// threshold; delta is then a lower bound.
  bool aborted = false;

  bool below_one() const noexcept { return delta < 1.0; }
};

/// Exact delta_s = max over |T| = s of max(lambda_max - 1, 1 - lambda_min)
/// of A_T^T A_T. Throws RicTooLarge when C(N, s) > kRicEnumerationCap.
/// With `abort_above`, stops as soon as a support exceeds that value.
RicReport exact_ric(const DenseMatrix& a, std::size_t s, std::optional<double> abort_above = std::nullopt,
                    std::size_t threads = 1);

/// delta_{as} = max over nodes of delta_{as}(A_l), for a = 1, 2, 3.
struct NetworkRic {
  double delta_s = 0.0;
  double delta_2s = 0.0;
  double delta_3s = 0.0;
  bool aborted = false;  // some order was only bounded from below
};

NetworkRic network_ric(std::span<const NodeData> nodes, std::size_t s,
                       std::optional<double> abort_above = std::nullopt, std::size_t threads = 1);

struct TheoremConstants {
  double delta_s = 0.0;
  double delta_2s = 0.0;
  double delta_3s = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
  double d5 = 0.0;
  double gamma = 0.0;
  double c_iters = 0.0;  // iteration multiplier: converges after c * s rounds
  double d_thm2 = 0.0;   // 4 / sqrt(1 - delta_3s)
  double d_thm3 = 0.0;   // 1 + c2 d1 / (1 - c1) + d4
  bool converges = false;  // c1 < 1
  bool in_guarantee_regime = false;  // delta_3s < 1/3
  bool vacuous = false;  // constants undefined (some delta >= 1); every bound is +inf

  /// Constants for an instance whose RIC is >= 1: every bound is +inf.
  static TheoremConstants vacuous_for(double delta_s, double delta_2s, double delta_3s);
};

/// Requires 0 <= delta_s <= delta_2s <= delta_3s < 1.
TheoremConstants theorem_constants(double delta_s, double delta_2s, double delta_3s);

/// theorem_constants when defined, otherwise vacuous_for.
TheoremConstants constants_or_vacuous(double delta_s, double delta_2s, double delta_3s);

struct IterationBound {
  std::size_t iterations = 0;
  double ratio = 0.0;  // ||x|| / ||e||_max as a power ratio
  bool degenerate = false;  // ratio <= 1: the bound gives no iterations
};

/// ceil(log(ratio) / log(1 / c1)) with ratio = 10^(snr_db / 10). Throws
/// NoGuarantee outside delta_3s < 1/3.
IterationBound theorem3_iterations(double delta_s, double delta_2s, double delta_3s, double snr_db);

enum class Regime { kInGuarantee, kOutside };
std::string_view to_string(Regime regime);

struct BoundRow {
  std::size_t iter = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  Regime regime = Regime::kOutside;
  bool violated = false;  // slack below -1e-12 max(1, rhs)
};

struct BoundReport {
  std::vector<BoundRow> rows;
  std::size_t violations() const;
  /// Violations inside the guarantee regime; each one is a defect.
  std::size_t in_regime_violations() const;
  double min_slack() const;
};

/// Evaluates, per round k,
///   sum_l ||x - x_hat_{l,k}||  <=  c1 sum_l w_l ||x - x_hat_{l,k-1}|| + d1 sum_l w_l ||e_l||
/// with x_hat_{l,0} = 0 and w the column sums of H. The trace must carry
/// vectors. A relative tolerance of 1e-12 absorbs rounding.
BoundReport check_recurrence(const IterationTrace& trace, const SparseVector& truth,
                             std::span<const double> noise_norms, const NetworkMatrix& h,
                             const TheoremConstants& constants);

struct StackedBoundReport {
  double lhs = 0.0;              // ||x_stack - x_hat_stack||
  double rhs = 0.0;              // d_thm2 ||e_stack||
  double rhs_per_node_sum = 0.0;  // d_thm2 sqrt(L) ||e||_max, the per-node bound stacked
  double slack = 0.0;
  Regime regime = Regime::kOutside;
  /// Both comparisons allow rounding of 1e-12 max(1, rhs).
  bool holds() const noexcept { return slack >= -1e-12 * std::max(1.0, rhs); }
  bool tighter_than_per_node() const noexcept { return rhs <= rhs_per_node_sum + 1e-12 * std::max(1.0, rhs); }
};

/// Stacked-vector bound for doubly stochastic networks on the final estimates.
StackedBoundReport check_corollary_stacked(std::span<const SparseVector> estimates, const SparseVector& truth,
                                           std::span<const double> noise_norms,
                                           const TheoremConstants& constants);

struct SupportBoundReport {
  bool noise_condition = false;   // ||e||_max <= gamma x*_s
  bool supports_exact = false;    // every T_hat_l == supp(x, s)
  double max_error = 0.0;         // max_l ||x - x_hat_l||
  double error_bound = 0.0;       // d_thm2 ||e||_max
  bool error_within_bound() const noexcept { return max_error <= error_bound; }
};

/// Final-state checks of the support-identification theorem.
SupportBoundReport check_support_theorem(std::span<const SparseVector> estimates, const SparseVector& truth,
                                         std::size_t s, std::span<const double> noise_norms,
                                         const TheoremConstants& constants);

struct LemmaStats {
  std::string name;
  std::size_t trials = 0;
  std::size_t skipped = 0;  // instances outside the lemma's hypotheses
  std::size_t violations = 0;
  double worst_slack = 0.0;  // min over trials of (rhs - lhs) / max(1, rhs)
};

struct LemmaReport {
  std::vector<LemmaStats> lemmas;
  bool all_hold() const;
};

/// Randomized checks of the three auxiliary inequalities: the projection
/// bound for least squares on a support, the sum-of-squares inequality, and
/// the pruned-index energy bound.
LemmaReport verify_lemmas(std::uint64_t seed, std::size_t trials);

/// ||x_{S_nabla}||, sqrt(2) ||(x - z)_{S2}||, sqrt(2) ||x - z|| for the
/// pruned-index lemma, with S_nabla the |supp z| - s1 smallest entries of z
/// on its support.
struct PrunedEnergy {
  double pruned = 0.0;
  double on_support = 0.0;
  double total = 0.0;
};
PrunedEnergy pruned_energy(std::span<const double> x, std::size_t s1, std::span<const double> z);

/// CSV: iter,lhs,rhs,slack,regime
void write_bound_csv(const BoundReport& report, std::ostream& out);

}  // namespace sparsemesh
