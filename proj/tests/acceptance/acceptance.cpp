// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --criterion N
//
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sparsemesh/analysis.hpp"
#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"
#include "sparsemesh/parallel.hpp"

namespace sm = sparsemesh;

namespace {

// Tolerances.
constexpr double kConstTol = 0.01;          // absolute, on c and the d's
constexpr double kConsensusTol = 1e-6;
constexpr double kMedianIterCap = 10.0;
constexpr double kOrderGapDb = 0.5;         // doubly stochastic ordering
constexpr double kDhtpGainDb = 1.0;         // right stochastic gain over HTP
constexpr double kImagePsnrSlackDb = 0.1;
constexpr double kDctRoundTrip = 1e-9;

constexpr std::uint64_t kSeed = 1;
constexpr std::size_t kScreenCandidates = 20000;
constexpr std::size_t kWantedInstances = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

sm::ExperimentConfig reference_config(const std::string& h_kind, std::optional<double> snr, std::size_t trials) {
  sm::ExperimentConfig c;
  c.L = 20;
  c.M = {100};
  c.N = 500;
  c.s = 20;
  c.trials = trials;
  c.seed = kSeed;
  c.topology_degree = 3;
  c.h_kind = h_kind;
  c.snr_db = {snr};
  c.max_iters = 30;
  c.threads = sm::default_threads();
  return c;
}

Outcome criterion_constants() {
  const sm::TheoremConstants k = sm::theorem_constants(0.2, 0.2, 0.2);
  const std::size_t kbar = sm::theorem3_iterations(0.2, 0.2, 0.2, 20.0).iterations;
  const bool ok = k.c_iters <= 5.0 && std::abs(k.c_iters - 4.19) <= kConstTol &&
                  std::abs(k.d_thm2 - 4.472) <= kConstTol && kbar == 9 && std::abs(k.d_thm3 - 13.68) <= kConstTol;
  return {ok, "c=" + fmt(k.c_iters) + " d_thm2=" + fmt(k.d_thm2) + " k_bar=" + std::to_string(kbar) +
                  " d_thm3=" + fmt(k.d_thm3)};
}

Outcome criterion_degenerate_network() {
  sm::ExperimentConfig c;
  c.L = 1;
  c.M = {50};
  c.N = 100;
  c.s = 5;
  const sm::NetworkMatrix h = sm::validate(sm::DenseMatrix::identity(1));
  std::size_t identical = 0;
  const std::size_t instances = 100;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::optional<double> snr = (i % 2 == 0) ? std::optional<double>(20.0) : std::nullopt;
    const sm::Problem p = sm::gen_problem(c, snr, sm::trial_seed(kSeed, i));
    const sm::RunResult a = sm::htp_run(p.nodes[0], c.s);
    const sm::RunResult b = sm::dhtp_run(p.nodes, h, c.s);
    if (a.trace == b.trace && a.estimates == b.estimates) ++identical;
  }
  return {identical == instances, std::to_string(identical) + "/" + std::to_string(instances) +
                                      " traces bit-identical"};
}

Outcome criterion_noiseless() {
  sm::ExperimentConfig c = reference_config("fixture-doubly", std::nullopt, 50);
  c.algorithms = {sm::Algorithm::kDhtp};
  const sm::NetworkMatrix h = sm::build_network(c);
  const auto rows = sm::run_monte_carlo(c, h, std::nullopt);
  const auto& r = rows.front();
  double worst_gap = 0.0;
  std::vector<double> iters;
  std::size_t stalled = 0;
  for (const auto& rec : r.records) {
    worst_gap = std::max(worst_gap, rec.failed ? INFINITY : rec.consensus_gap);
    iters.push_back(double(rec.iterations));
    if (rec.stop_reason == sm::StopReason::kSupportStall) ++stalled;
  }
  std::sort(iters.begin(), iters.end());
  const double median = iters.size() % 2 ? iters[iters.size() / 2]
                                         : 0.5 * (iters[iters.size() / 2 - 1] + iters[iters.size() / 2]);
  const bool ok = r.failures == 0 && r.pse == 1.0 && worst_gap <= kConsensusTol && median <= kMedianIterCap &&
                  stalled == r.records.size();
  return {ok, "pse=" + fmt(r.pse, 3) + " max_consensus_gap=" + sm::format_real(worst_gap) +
                  " median_iters=" + fmt(median, 1) + " stalled=" + std::to_string(stalled) + "/" +
                  std::to_string(r.records.size())};
}

struct Msenr {
  double htp = 0.0, dhtp = 0.0, dihat = 0.0;
  std::size_t failures = 0;
};

Msenr msenr_at_30db(const std::string& h_kind) {
  const sm::ExperimentConfig c = reference_config(h_kind, 30.0, 200);
  const sm::ExperimentResult res = sm::run_experiment(c);
  Msenr m;
  for (const auto& row : res.rows) {
    m.failures += row.failures;
    if (row.algorithm == sm::Algorithm::kHtp) m.htp = row.msenr_db;
    if (row.algorithm == sm::Algorithm::kDhtp) m.dhtp = row.msenr_db;
    if (row.algorithm == sm::Algorithm::kDihat) m.dihat = row.msenr_db;
  }
  return m;
}

std::string msenr_detail(const Msenr& m) {
  return "mSENR dB: dhtp=" + fmt(m.dhtp, 2) + " dihat=" + fmt(m.dihat, 2) + " htp=" + fmt(m.htp, 2) +
         " failures=" + std::to_string(m.failures);
}

Outcome criterion_doubly_ordering() {
  const Msenr m = msenr_at_30db("fixture-doubly");
  const bool ok = m.failures == 0 && m.dhtp - m.dihat >= kOrderGapDb && m.dihat - m.htp >= kOrderGapDb;
  return {ok, msenr_detail(m)};
}

Outcome criterion_right_ordering() {
  const Msenr m = msenr_at_30db("fixture-right");
  const double gain = m.dhtp - m.htp;
  const bool ok = m.failures == 0 && gain >= kDhtpGainDb && std::abs(m.dihat - m.htp) < gain;
  return {ok, msenr_detail(m)};
}

// Small-instance suite: M=16, N=24, s=2, L=3, screened by exact RIC.
struct SmallSuite {
  std::size_t screened = 0;
  std::vector<std::uint64_t> certified_seeds;
  double best_delta_3s = INFINITY;  // smallest network delta_3s among fully evaluated candidates
  std::size_t fully_evaluated = 0;
};

sm::ExperimentConfig small_config() {
  sm::ExperimentConfig c;
  c.L = 3;
  c.M = {16};
  c.N = 24;
  c.s = 2;
  c.trials = 1;
  c.h_kind = "doubly";
  c.topology_degree = 1;
  c.seed = kSeed;
  return c;
}

const SmallSuite& small_suite() {
  static const SmallSuite suite = [] {
    SmallSuite s;
    const sm::ExperimentConfig c = small_config();
    const std::size_t threads = sm::default_threads();
    // Exact network delta_3s on a few candidates shows how far off the regime is.
    for (std::size_t i = 0; i < 5; ++i) {
      const sm::Problem p = sm::gen_problem(c, std::nullopt, sm::trial_seed(kSeed, i));
      s.best_delta_3s = std::min(s.best_delta_3s, sm::network_ric(p.nodes, c.s, std::nullopt, threads).delta_3s);
      ++s.fully_evaluated;
    }
    std::vector<char> ok(kScreenCandidates, 0);
    sm::parallel_for(kScreenCandidates, threads, [&](std::size_t i) {
      const sm::Problem p = sm::gen_problem(c, std::nullopt, sm::trial_seed(kSeed, i));
      const sm::NetworkRic ric = sm::network_ric(p.nodes, c.s, sm::kGuaranteeDelta);
      ok[i] = !ric.aborted && ric.delta_3s < sm::kGuaranteeDelta;
    });
    s.screened = kScreenCandidates;
    for (std::size_t i = 0; i < kScreenCandidates && s.certified_seeds.size() < kWantedInstances; ++i) {
      if (ok[i]) s.certified_seeds.push_back(i);
    }
    return s;
  }();
  return suite;
}

std::string suite_detail(const SmallSuite& s) {
  return "certified " + std::to_string(s.certified_seeds.size()) + " of " + std::to_string(s.screened) +
         " screened instances (need " + std::to_string(kWantedInstances) + "); smallest exact delta_3s over " +
         std::to_string(s.fully_evaluated) + " evaluated = " + fmt(s.best_delta_3s, 3);
}

Outcome criterion_recurrence() {
  const SmallSuite& s = small_suite();
  const sm::ExperimentConfig c = small_config();
  const sm::NetworkMatrix h = sm::build_network(c);
  std::size_t in_regime_violations = 0;
  std::size_t rows = 0;
  for (std::uint64_t i : s.certified_seeds) {
    for (std::optional<double> snr : {std::optional<double>{}, std::optional<double>(20.0)}) {
      const sm::Problem p = sm::gen_problem(c, snr, sm::trial_seed(kSeed, i));
      const sm::NetworkRic ric = sm::network_ric(p.nodes, c.s);
      const sm::TheoremConstants k = sm::theorem_constants(ric.delta_s, ric.delta_2s, ric.delta_3s);
      const sm::RunResult run = sm::dhtp_run(p.nodes, h, c.s);
      const sm::BoundReport rep = sm::check_recurrence(run.trace, p.truth, p.noise_norms, h, k);
      in_regime_violations += rep.in_regime_violations();
      rows += rep.rows.size();
    }
  }
  const bool ok = s.certified_seeds.size() >= kWantedInstances && in_regime_violations == 0;
  return {ok, suite_detail(s) + "; " + std::to_string(in_regime_violations) + " violations over " +
                  std::to_string(rows) + " checked rounds"};
}

Outcome criterion_support() {
  const SmallSuite& s = small_suite();
  const sm::ExperimentConfig c = small_config();
  const sm::NetworkMatrix h = sm::build_network(c);
  std::size_t checked = 0, failures = 0;
  for (std::uint64_t i : s.certified_seeds) {
    const sm::Problem clean = sm::gen_problem(c, std::nullopt, sm::trial_seed(kSeed, i));
    const sm::NetworkRic ric = sm::network_ric(clean.nodes, c.s);
    const sm::TheoremConstants k = sm::theorem_constants(ric.delta_s, ric.delta_2s, ric.delta_3s);
    // Add noise at half of gamma x*_s per node.
    double xs = INFINITY;
    for (std::size_t j : clean.truth.support()) xs = std::min(xs, std::abs(clean.truth[j]));
    std::vector<sm::NodeData> nodes = clean.nodes;
    sm::Vector norms(nodes.size());
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      const double target = 0.5 * k.gamma * xs;
      const double shift = target / std::sqrt(double(nodes[l].y.size()));
      for (std::size_t r = 0; r < nodes[l].y.size(); ++r) nodes[l].y[r] += (r % 2 ? -shift : shift);
      norms[l] = target;
    }
    const sm::RunResult run = sm::dhtp_run(nodes, h, c.s);
    const sm::SupportBoundReport sup = sm::check_support_theorem(run.estimates, clean.truth, c.s, norms, k);
    const sm::StackedBoundReport st = sm::check_corollary_stacked(run.estimates, clean.truth, norms, k);
    ++checked;
    if (!(sup.noise_condition && sup.supports_exact && sup.error_within_bound() && st.holds())) ++failures;
  }
  const bool ok = s.certified_seeds.size() >= kWantedInstances && failures == 0;
  return {ok, suite_detail(s) + "; " + std::to_string(failures) + " failures over " + std::to_string(checked) +
                  " checked instances"};
}

Outcome criterion_lemmas() {
  const sm::LemmaReport rep = sm::verify_lemmas(kSeed, 10000);
  std::ostringstream d;
  bool enough = true;
  for (const auto& l : rep.lemmas) {
    d << l.name << ": " << l.violations << "/" << l.trials << " violations; ";
    enough &= l.trials >= 10000;
  }
  return {rep.all_hold() && enough, d.str()};
}

Outcome criterion_payload() {
  sm::ExperimentConfig c = reference_config("fixture-doubly", 30.0, 1);
  const sm::NetworkMatrix h = sm::build_network(c);
  const sm::Problem p = sm::gen_problem(c, 30.0, sm::trial_seed(kSeed, 0));
  sm::StoppingCriterion stop;
  stop.max_iters = 3;
  stop.support_stall = std::nullopt;
  sm::RunOptions opts;
  opts.record_vectors = false;
  const auto dhtp = sm::dhtp_run(p.nodes, h, c.s, stop, opts).trace;
  const auto dihat = sm::dihat_run(p.nodes, h, c.s, stop, opts).trace;
  // Per edge per iteration: payload / messages.
  const std::size_t pd = dhtp.total_payload_scalars(), md = dhtp.total_messages();
  const std::size_t pi = dihat.total_payload_scalars(), mi = dihat.total_messages();
  const bool exact = md == mi && md > 0 && pd * 50600 == pi * 500 && pd % md == 0 && pi % mi == 0;
  const double ratio = double(pi / mi) / double(pd / md);
  return {exact && ratio == 101.2, "per-message payload dihat=" + std::to_string(pi / mi) +
                                       " dhtp=" + std::to_string(pd / md) + " ratio=" + sm::format_real(ratio)};
}

Outcome criterion_image() {
  const auto path = std::filesystem::temp_directory_path() / "sparsemesh_acceptance.pgm";
  sm::write_pgm(sm::synthetic_image(128, kSeed), path);
  const sm::GrayImage img = sm::read_pgm(path);
  std::filesystem::remove(path);

  const sm::Vector px = img.as_doubles();
  const sm::Vector back = sm::idct2(sm::dct2(px, 128), 128);
  double worst = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) worst = std::max(worst, std::abs(back[i] - px[i]));

  sm::ImageConfig cfg;
  cfg.blocks = 64;
  cfg.sparsity_fraction = 0.11;
  cfg.measurement_ratio = 0.5;
  cfg.L = 20;
  cfg.h_kind = "fixture-doubly";
  cfg.algorithm = sm::Algorithm::kDhtp;
  cfg.seed = kSeed;
  cfg.threads = sm::default_threads();
  const sm::ImageResult r = sm::image_pipeline(img, cfg);
  const bool ok = worst <= kDctRoundTrip && r.failed_blocks == 0 &&
                  r.psnr_db >= r.truncation_psnr_db - kImagePsnrSlackDb;
  return {ok, "psnr=" + fmt(r.psnr_db, 3) + " dB truncation=" + fmt(r.truncation_psnr_db, 3) +
                  " dB (s=" + std::to_string(r.s) + ", M=" + std::to_string(r.m) +
                  ") dct_round_trip=" + sm::format_real(worst)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "theorem constants at delta=0.2", criterion_constants},
      {2, "single-node DHTP equals HTP", criterion_degenerate_network},
      {3, "noiseless exact recovery", criterion_noiseless},
      {4, "mSENR ordering, doubly stochastic H", criterion_doubly_ordering},
      {5, "mSENR ordering, right stochastic H", criterion_right_ordering},
      {6, "recurrence bound on certified instances", criterion_recurrence},
      {7, "support property on certified instances", criterion_support},
      {8, "lemma property suites", criterion_lemmas},
      {9, "communication accounting", criterion_payload},
      {10, "image pipeline sanity", criterion_image},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all_pass = true;
  bool any = false;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    any = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail
              << " (" << fmt(secs, 1) << " s)" << std::endl;
    all_pass &= o.pass;
  }
  if (!any) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
