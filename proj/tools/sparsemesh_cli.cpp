// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

// sparsemesh: command-line front end.
//
// Exit codes: 0 success, 1 science failure (bound violated, failed trial
// under --strict), 2 usage, configuration or environment error.
// Machine-readable output goes to stdout, prose to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "sparsemesh/analysis.hpp"
#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"
#include "sparsemesh/kernels.hpp"
#include "sparsemesh/parallel.hpp"

namespace sm = sparsemesh;

namespace {

constexpr int kOk = 0;
constexpr int kScienceFailure = 1;
constexpr int kUsage = 2;

std::optional<double> parse_single_snr(const std::string& text) {
  const auto list = sm::parse_snr_list(text);
  if (list.size() != 1) throw sm::InvalidArgument("expected a single --snr-db value");
  return list.front();
}

void print_kv(std::ostream& out, std::string_view key, const std::string& value) {
  out << std::left << std::setw(22) << key << ' ' << value << '\n';
}

void print_kv(std::ostream& out, std::string_view key, double value) { print_kv(out, key, sm::format_real(value)); }

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string snr_db;
  std::string out;
  std::string format = "csv";
  bool traces = false;
  std::string trace_dir = "traces";
  bool strict = false;
};

int cmd_run(const RunArgs& args, std::size_t threads) {
  sm::ExperimentConfig config;
  if (!args.config.empty()) config = sm::load_config(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.trials) config.trials = *args.trials;
  if (!args.snr_db.empty()) config.snr_db = sm::parse_snr_list(args.snr_db);
  config.threads = threads;
  config.check();

  sm::TraceSink sink;
  if (args.traces) {
    std::filesystem::create_directories(args.trace_dir);
    sink = [&](sm::Algorithm alg, std::optional<double> snr, std::size_t trial, const sm::IterationTrace& trace,
               const sm::SparseVector& truth) {
      std::ostringstream name;
      name << "trace_" << sm::to_string(alg) << "_snr" << (snr ? sm::format_real(*snr) : "none") << "_t" << trial
           << ".csv";
      std::ofstream f(std::filesystem::path(args.trace_dir) / name.str());
      if (!f) throw sm::IoError("cannot write trace " + name.str());
      sm::write_trace_csv(trace, f, &truth);
    };
  }

  std::cerr << "running " << config.trials << " trials x " << config.snr_db.size() << " SNR value(s) on "
            << threads << " thread(s), kernels: " << sm::simd::isa_name(sm::simd::active_isa()) << '\n';
  const sm::ExperimentResult result = sm::run_experiment(config, sink);

  const auto format = args.format == "jsonl" ? sm::ResultFormat::kJsonLines : sm::ResultFormat::kCsv;
  if (args.out.empty()) {
    if (format == sm::ResultFormat::kCsv) {
      sm::write_results_csv(result, std::cout);
    } else {
      sm::write_results_jsonl(result, std::cout);
    }
  } else {
    sm::export_results(result, args.out, format);
    std::cerr << "wrote " << args.out << '\n';
  }

  std::size_t failures = 0;
  for (const auto& row : result.rows) {
    failures += row.failures;
    for (const auto& rec : row.records) {
      if (rec.failed) {
        std::cerr << "trial " << rec.trial << " (" << sm::to_string(row.algorithm) << ") failed: " << rec.error
                  << '\n';
      }
    }
  }
  return (args.strict && failures > 0) ? kScienceFailure : kOk;
}

struct NetworkArgs {
  std::size_t nodes = 20;
  std::size_t degree = 3;
  std::string kind = "doubly";
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_network(const NetworkArgs& args) {
  const sm::NetworkMatrix h = sm::build_network(args.kind, args.nodes, args.degree, args.seed);
  if (args.out.empty()) {
    const auto& m = h.matrix();
    std::cout << std::setprecision(12);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) std::cout << (c ? " " : "") << m(r, c);
      std::cout << '\n';
    }
  } else {
    sm::save_matrix(h, args.out);
  }
  std::cerr << "network: " << h.size() << " nodes, " << sm::to_string(h.kind()) << '\n';
  return kOk;
}

struct BoundsArgs {
  std::size_t m = 16;
  std::size_t n = 24;
  std::size_t s = 2;
  std::size_t nodes = 3;
  std::size_t degree = 1;
  std::string kind = "doubly";
  std::uint64_t seed = 1;
  std::string snr_db = "none";
  std::size_t max_iters = 30;
};

int cmd_check_bounds(const BoundsArgs& args, std::size_t threads) {
  sm::ExperimentConfig config;
  config.L = args.nodes;
  config.M = {args.m};
  config.N = args.n;
  config.s = args.s;
  config.trials = 1;
  config.seed = args.seed;
  config.max_iters = args.max_iters;
  const auto snr = parse_single_snr(args.snr_db);
  config.snr_db = {snr};
  config.check();
  if (sm::binomial(args.n, 3 * args.s) > sm::kRicEnumerationCap) {
    throw sm::RicTooLarge("C(N, 3s) exceeds the enumeration cap; reduce N or s");
  }

  const sm::NetworkMatrix h = sm::build_network(args.kind, args.nodes, args.degree, args.seed);
  const sm::Problem problem = sm::gen_problem(config, snr, sm::trial_seed(args.seed, 0));
  const sm::NetworkRic ric = sm::network_ric(problem.nodes, args.s, std::nullopt, threads);
  const sm::TheoremConstants k = sm::constants_or_vacuous(ric.delta_s, ric.delta_2s, ric.delta_3s);

  sm::StoppingCriterion stop;
  stop.max_iters = args.max_iters;
  const sm::RunResult run = sm::dhtp_run(problem.nodes, h, args.s, stop);
  const sm::BoundReport report = sm::check_recurrence(run.trace, problem.truth, problem.noise_norms, h, k);

  std::cerr << "delta_s=" << sm::format_real(ric.delta_s) << " delta_2s=" << sm::format_real(ric.delta_2s)
            << " delta_3s=" << sm::format_real(ric.delta_3s) << " c1=" << sm::format_real(k.c1) << " ("
            << sm::to_string(k.in_guarantee_regime ? sm::Regime::kInGuarantee : sm::Regime::kOutside) << ")\n";
  sm::write_bound_csv(report, std::cout);
  std::cerr << report.violations() << " violation(s), " << report.in_regime_violations() << " in regime\n";
  return report.in_regime_violations() == 0 ? kOk : kScienceFailure;
}

int cmd_verify_lemmas(std::uint64_t seed, std::size_t trials) {
  const sm::LemmaReport report = sm::verify_lemmas(seed, trials);
  std::cout << "lemma,trials,skipped,violations,worst_relative_slack\n";
  for (const auto& l : report.lemmas) {
    std::cout << l.name << ',' << l.trials << ',' << l.skipped << ',' << l.violations << ','
              << sm::format_real(l.worst_slack) << '\n';
  }
  return report.all_hold() ? kOk : kScienceFailure;
}

struct RicArgs {
  std::size_t m = 16;
  std::size_t n = 24;
  std::size_t order = 2;
  std::uint64_t seed = 1;
};

int cmd_ric(const RicArgs& args, std::size_t threads) {
  sm::ExperimentConfig config;
  config.L = 1;
  config.M = {args.m};
  config.N = args.n;
  config.s = std::min(args.order, std::min(args.m, args.n));
  const sm::Problem p = sm::gen_problem(config, std::nullopt, args.seed);
  const sm::RicReport r = sm::exact_ric(p.nodes.front().a, args.order, std::nullopt, threads);
  print_kv(std::cout, "order", std::to_string(r.order));
  print_kv(std::cout, "delta", r.delta);
  std::string support;
  for (std::size_t i : r.argmax_support) support += (support.empty() ? "" : ";") + std::to_string(i);
  print_kv(std::cout, "argmax_support", support);
  print_kv(std::cout, "method", r.method);
  return kOk;
}

struct ImageArgs {
  std::string input;
  std::size_t side = 128;
  std::string out;
  std::string blocks_csv;
  std::string algorithm = "dhtp";
  std::string snr_db = "none";
  std::string partition = "zigzag";
  sm::ImageConfig config;
};

int cmd_image(ImageArgs args, std::size_t threads) {
  const sm::GrayImage image = args.input.empty() ? sm::synthetic_image(args.side, args.config.seed)
                                                 : sm::read_pgm(args.input);
  args.config.algorithm = sm::parse_algorithm(args.algorithm);
  args.config.snr_db = parse_single_snr(args.snr_db);
  if (args.partition == "zigzag") {
    args.config.partition = sm::Partition::kZigZag;
  } else if (args.partition == "raster") {
    args.config.partition = sm::Partition::kRaster;
  } else {
    throw sm::InvalidArgument("unknown partition '" + args.partition + "'");
  }
  args.config.threads = threads;
  const sm::ImageResult r = sm::image_pipeline(image, args.config);
  print_kv(std::cout, "side", std::to_string(image.width));
  print_kv(std::cout, "blocks", std::to_string(args.config.blocks));
  print_kv(std::cout, "part_length", std::to_string(r.part_length));
  print_kv(std::cout, "s", std::to_string(r.s));
  print_kv(std::cout, "m", std::to_string(r.m));
  print_kv(std::cout, "psnr_db", r.psnr_db);
  print_kv(std::cout, "truncation_psnr_db", r.truncation_psnr_db);
  print_kv(std::cout, "failed_blocks", std::to_string(r.failed_blocks));
  if (!args.out.empty()) sm::write_pgm(r.reconstruction, args.out);
  if (!args.blocks_csv.empty()) {
    std::ofstream f(args.blocks_csv);
    if (!f) throw sm::IoError("cannot write " + args.blocks_csv);
    f << "block,psnr_db\n";
    for (std::size_t b = 0; b < r.block_psnr_db.size(); ++b) f << b << ',' << sm::format_real(r.block_psnr_db[b]) << '\n';
  }
  return r.failed_blocks == 0 ? kOk : kScienceFailure;
}

struct ConstantsArgs {
  std::optional<double> delta;
  std::optional<double> delta_s;
  std::optional<double> delta_2s;
  std::optional<double> delta_3s;
  std::string snr_db = "20";
};

int cmd_constants(const ConstantsArgs& args) {
  const double d3 = args.delta_3s.value_or(args.delta.value_or(-1.0));
  const double d2 = args.delta_2s.value_or(args.delta.value_or(d3));
  const double d1 = args.delta_s.value_or(args.delta.value_or(d2));
  if (d3 < 0.0) throw sm::InvalidArgument("give --delta or --delta-3s");
  const sm::TheoremConstants k = sm::theorem_constants(d1, d2, d3);
  auto& o = std::cout;
  print_kv(o, "delta_s", k.delta_s);
  print_kv(o, "delta_2s", k.delta_2s);
  print_kv(o, "delta_3s", k.delta_3s);
  print_kv(o, "c1", k.c1);
  print_kv(o, "c2", k.c2);
  print_kv(o, "c3", k.c3);
  print_kv(o, "d1", k.d1);
  print_kv(o, "d2", k.d2);
  print_kv(o, "d3", k.d3);
  print_kv(o, "d4", k.d4);
  print_kv(o, "d5", k.d5);
  print_kv(o, "gamma", k.gamma);
  print_kv(o, "c_iters", k.c_iters);
  print_kv(o, "d_thm2", k.d_thm2);
  print_kv(o, "d_thm3", k.d_thm3);
  print_kv(o, "converges", k.converges ? "true" : "false");
  print_kv(o, "in_guarantee_regime", k.in_guarantee_regime ? "true" : "false");
  const auto snr = parse_single_snr(args.snr_db);
  if (snr && k.in_guarantee_regime && k.converges) {
    const sm::IterationBound b = sm::theorem3_iterations(d1, d2, d3, *snr);
    print_kv(o, "k_bar", std::to_string(b.iterations));
    print_kv(o, "k_bar_snr_db", *snr);
  } else {
    print_kv(o, "k_bar", "none");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed hard thresholding pursuit over networks"};
  app.require_subcommand(1);
  std::size_t threads = sm::default_threads();
  app.add_option("--threads", threads, "Worker threads (default: available parallelism)")
      ->check(CLI::PositiveNumber);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Monte-Carlo comparison of HTP, DHTP and DiHaT");
  run_cmd->add_option("--config", run.config, "Config file (key = value)")->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--trials", run.trials, "Trials per SNR value");
  run_cmd->add_option("--snr-db", run.snr_db, "SNR list in dB, e.g. 10,20,30 or none");
  run_cmd->add_option("--out", run.out, "Results file (default: stdout)");
  run_cmd->add_option("--format", run.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  run_cmd->add_flag("--traces", run.traces, "Write one trace CSV per trial and algorithm");
  run_cmd->add_option("--trace-dir", run.trace_dir, "Directory for --traces output");
  run_cmd->add_flag("--strict", run.strict, "Exit 1 if any trial failed");

  NetworkArgs net;
  auto* net_cmd = app.add_subcommand("gen-network", "Generate a right or doubly stochastic network matrix");
  net_cmd->add_option("--nodes", net.nodes, "Number of nodes");
  net_cmd->add_option("--degree", net.degree, "Random neighbours per node besides itself");
  net_cmd->add_option("--kind", net.kind, "right, doubly, fixture-right, fixture-doubly");
  net_cmd->add_option("--seed", net.seed, "Seed");
  net_cmd->add_option("--out", net.out, "Output file (default: stdout)");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("check-bounds", "Check the DHTP recurrence bound on a small instance");
  bounds_cmd->add_option("--M", bounds.m, "Measurements per node");
  bounds_cmd->add_option("--N", bounds.n, "Signal dimension");
  bounds_cmd->add_option("--s", bounds.s, "Sparsity");
  bounds_cmd->add_option("--L", bounds.nodes, "Nodes");
  bounds_cmd->add_option("--degree", bounds.degree, "Random neighbours per node");
  bounds_cmd->add_option("--kind", bounds.kind, "Network kind");
  bounds_cmd->add_option("--seed", bounds.seed, "Seed");
  bounds_cmd->add_option("--snr-db", bounds.snr_db, "SNR in dB or none");
  bounds_cmd->add_option("--max-iters", bounds.max_iters, "Iteration cap");

  std::uint64_t lemma_seed = 1;
  std::size_t lemma_trials = 10000;
  auto* lemma_cmd = app.add_subcommand("verify-lemmas", "Randomized checks of the auxiliary inequalities");
  lemma_cmd->add_option("--seed", lemma_seed, "Seed");
  lemma_cmd->add_option("--trials", lemma_trials, "Trials per inequality");

  RicArgs ric;
  auto* ric_cmd = app.add_subcommand("ric", "Exact restricted isometry constant of a Gaussian matrix");
  ric_cmd->add_option("--M", ric.m, "Rows");
  ric_cmd->add_option("--N", ric.n, "Columns");
  ric_cmd->add_option("--order", ric.order, "RIC order");
  ric_cmd->add_option("--seed", ric.seed, "Seed");

  ImageArgs img;
  auto* img_cmd = app.add_subcommand("image", "DCT-domain distributed recovery of a grayscale image");
  img_cmd->add_option("--input", img.input, "Binary PGM input (default: synthetic scene)");
  img_cmd->add_option("--side", img.side, "Synthetic scene side length");
  img_cmd->add_option("--out", img.out, "Reconstructed PGM");
  img_cmd->add_option("--blocks-csv", img.blocks_csv, "Per-block PSNR CSV");
  img_cmd->add_option("--blocks", img.config.blocks, "Coefficient blocks");
  img_cmd->add_option("--fraction", img.config.sparsity_fraction, "Kept coefficient fraction per block");
  img_cmd->add_option("--ratio", img.config.measurement_ratio, "Measurements per node / block length");
  img_cmd->add_option("--L", img.config.L, "Nodes");
  img_cmd->add_option("--kind", img.config.h_kind, "Network kind");
  img_cmd->add_option("--algorithm", img.algorithm, "htp, dhtp or dihat");
  img_cmd->add_option("--snr-db", img.snr_db, "SNR in dB or none");
  img_cmd->add_option("--partition", img.partition, "zigzag or raster");
  img_cmd->add_option("--seed", img.config.seed, "Seed");

  ConstantsArgs cst;
  auto* cst_cmd = app.add_subcommand("constants", "Convergence constants for given RIC values");
  cst_cmd->add_option("--delta", cst.delta, "Common value for delta_s, delta_2s, delta_3s");
  cst_cmd->add_option("--delta-s", cst.delta_s, "delta_s");
  cst_cmd->add_option("--delta-2s", cst.delta_2s, "delta_2s");
  cst_cmd->add_option("--delta-3s", cst.delta_3s, "delta_3s");
  cst_cmd->add_option("--snr-db", cst.snr_db, "SNR for the iteration count, or none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run, threads);
    if (*net_cmd) return cmd_gen_network(net);
    if (*bounds_cmd) return cmd_check_bounds(bounds, threads);
    if (*lemma_cmd) return cmd_verify_lemmas(lemma_seed, lemma_trials);
    if (*ric_cmd) return cmd_ric(ric, threads);
    if (*img_cmd) return cmd_image(img, threads);
    if (*cst_cmd) return cmd_constants(cst);
  } catch (const sm::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sm::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sm::RicTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sm::StochasticityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sm::NotNonnegativeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kScienceFailure;
  }
  return kUsage;
}
