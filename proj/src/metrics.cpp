// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"

namespace sparsemesh {

double msenr_db(std::span<const double> signal_energy, std::span<const Vector> node_error_energy) {
  if (signal_energy.empty() || signal_energy.size() != node_error_energy.size()) {
    throw InvalidArgument("msenr needs one error row per trial and at least one trial");
  }
  const std::size_t nodes = node_error_energy.front().size();
  if (nodes == 0) throw InvalidArgument("msenr needs at least one node");
  const double trials = double(signal_energy.size());
  double mean_signal = 0.0;
  for (double e : signal_energy) mean_signal += e;
  mean_signal /= trials;

  double ratio_sum = 0.0;
  for (std::size_t l = 0; l < nodes; ++l) {
    double mean_error = 0.0;
    for (const auto& row : node_error_energy) {
      if (row.size() != nodes) throw InvalidArgument("ragged per-node error rows");
      mean_error += row[l];
    }
    mean_error /= trials;
    if (mean_error <= kExactEnergyFloor * mean_signal) return std::numeric_limits<double>::infinity();
    ratio_sum += mean_signal / mean_error;
  }
  return 10.0 * std::log10(ratio_sum / double(nodes));
}

double pse_probability(const std::vector<bool>& trial_exact) {
  if (trial_exact.empty()) return 0.0;
  return double(std::count(trial_exact.begin(), trial_exact.end(), true)) / double(trial_exact.size());
}

bool all_supports_exact(std::span<const SparseVector> estimates, const SparseVector& truth) {
  const SupportSet target = truth.support();
  return std::all_of(estimates.begin(), estimates.end(),
                     [&](const SparseVector& e) { return e.support() == target; });
}

double psnr(std::span<const double> original, std::span<const double> reconstructed) {
  if (original.size() != reconstructed.size()) throw InvalidArgument("psnr: dimension mismatch");
  double peak = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    peak = std::max(peak, std::abs(original[i]));
    const double d = original[i] - reconstructed[i];
    err += d * d;
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / err);
}

}  // namespace sparsemesh
