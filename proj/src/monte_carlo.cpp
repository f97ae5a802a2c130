// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <exception>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"
#include "sparsemesh/parallel.hpp"

namespace sparsemesh {

namespace {

void aggregate(AlgorithmResult& row) {
  std::vector<double> signal;
  std::vector<Vector> errors;
  std::vector<bool> exact;
  double iters = 0.0;
  double payload = 0.0;
  for (const auto& r : row.records) {
    if (r.failed) {
      ++row.failures;
      continue;
    }
    signal.push_back(r.signal_energy);
    errors.push_back(r.node_error_energy);
    exact.push_back(r.exact_support);
    iters += double(r.iterations);
    payload += double(r.payload_scalars);
  }
  const std::size_t ok = signal.size();
  if (ok == 0) {
    row.msenr_db = std::nan("");
    row.pse = 0.0;
    row.mean_iters = row.mean_payload_scalars = std::nan("");
    return;
  }
  row.msenr_db = msenr_db(signal, errors);
  row.pse = pse_probability(exact);
  row.mean_iters = iters / double(ok);
  row.mean_payload_scalars = payload / double(ok);
}

}  // namespace

std::vector<AlgorithmResult> run_monte_carlo(const ExperimentConfig& config, const NetworkMatrix& h,
                                             std::optional<double> snr_db, const TraceSink& sink) {
  config.check();
  if (h.size() != config.L) throw InvalidArgument("network size does not match L");
  const std::size_t algs = config.algorithms.size();
  std::vector<AlgorithmResult> rows(algs);
  for (std::size_t a = 0; a < algs; ++a) {
    rows[a].algorithm = config.algorithms[a];
    rows[a].snr_db = snr_db;
    rows[a].s = config.s;
    rows[a].s_assumed = config.effective_s();
    rows[a].trials = config.trials;
    rows[a].records.resize(config.trials);
  }
  StoppingCriterion stop;
  stop.max_iters = config.max_iters;
  stop.support_stall = config.support_stall;
  RunOptions options;
  options.record_vectors = static_cast<bool>(sink);

  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(config.seed, t);
    Problem problem;
    std::string gen_error;
    try {
      problem = gen_problem(config, snr_db, seed);
    } catch (const std::exception& e) {
      gen_error = e.what();
    }
    const double signal = problem.truth.norm() * problem.truth.norm();
    for (std::size_t a = 0; a < algs; ++a) {
      TrialRecord& rec = rows[a].records[t];
      rec.trial = t;
      rec.seed = seed;
      if (!gen_error.empty()) {
        rec.failed = true;
        rec.error = gen_error;
        continue;
      }
      try {
        const RunResult run =
            run_algorithm(config.algorithms[a], problem.nodes, h, config.effective_s(), stop, options);
        rec.signal_energy = signal;
        rec.node_error_energy.resize(run.estimates.size());
        for (std::size_t l = 0; l < run.estimates.size(); ++l) {
          const double d = distance(run.estimates[l].view(), problem.truth.view());
          rec.node_error_energy[l] = d * d;
        }
        rec.exact_support = all_supports_exact(run.estimates, problem.truth);
        rec.iterations = run.trace.iterations();
        rec.stop_reason = run.trace.stop_reason;
        rec.payload_scalars = run.trace.total_payload_scalars();
        rec.consensus_gap = consensus_gap(run.estimates);
        if (sink) sink(config.algorithms[a], snr_db, t, run.trace, problem.truth);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  for (auto& row : rows) aggregate(row);
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TraceSink& sink) {
  config.check();
  const NetworkMatrix h = build_network(config);
  ExperimentResult result;
  for (const auto& snr : config.snr_db) {
    auto rows = run_monte_carlo(config, h, snr, sink);
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  return result;
}

}  // namespace sparsemesh
