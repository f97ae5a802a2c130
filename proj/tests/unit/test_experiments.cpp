// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "sparsemesh/errors.hpp"
#include "sparsemesh/experiments.hpp"

using namespace sparsemesh;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.L = 4;
  c.M = {30};
  c.N = 60;
  c.s = 4;
  c.trials = 6;
  c.h_kind = "doubly";
  c.topology_degree = 2;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("gen_problem noiseless observations are exact") {
  const ExperimentConfig c = tiny();
  const Problem p = gen_problem(c, std::nullopt, 3);
  CHECK(p.truth.nnz() == 4);
  for (const auto& node : p.nodes) {
    CHECK(norm2(residual(node.a, node.y, p.truth.view())) == 0.0);
  }
  for (double e : p.noise_norms) CHECK(e == 0.0);
  CHECK(gen_problem(c, std::nullopt, 3).truth == p.truth);
  CHECK_FALSE(gen_problem(c, std::nullopt, 4).truth == p.truth);
}

TEST_CASE("gen_problem realizes the SNR in expectation") {
  ExperimentConfig c;
  c.L = 1;
  c.M = {20};
  c.N = 40;
  c.s = 5;
  double signal = 0.0, noise = 0.0;
  const std::size_t draws = 10000;
  for (std::size_t t = 0; t < draws; ++t) {
    const Problem p = gen_problem(c, 30.0, trial_seed(7, t));
    signal += p.truth.norm() * p.truth.norm();
    noise += p.noise_norms[0] * p.noise_norms[0];
  }
  CHECK(std::abs(signal / noise / 1000.0 - 1.0) < 0.05);

  double n0 = 0.0;
  for (std::size_t t = 0; t < 2000; ++t) {
    const Problem p = gen_problem(c, 0.0, trial_seed(8, t));
    n0 += p.noise_norms[0] * p.noise_norms[0];
  }
  CHECK(n0 / 2000.0 == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("config invariants") {
  ExperimentConfig c = tiny();
  c.s = 31;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c = tiny();
  c.trials = 0;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c = tiny();
  c.M = {30, 30};
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c = tiny();
  c.s_assumed = 61;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
}

TEST_CASE("msenr") {
  const Vector sig1{4.0};
  const std::vector<Vector> err1{Vector{1.0}};
  CHECK(msenr_db(sig1, err1) == doctest::Approx(6.02059991328));
  const Vector sig2{4.0, 9.0};
  const std::vector<Vector> err2{Vector{1.0, 0.5}, Vector{2.0, 0.25}};
  CHECK(msenr_db(sig2, err2) == doctest::Approx(10.347621062592118).epsilon(1e-12));
  const std::vector<Vector> exact{Vector{0.0, 0.0}, Vector{0.0, 0.0}};
  CHECK(std::isinf(msenr_db(sig2, exact)));
  // The zero estimator's error is the signal itself.
  const std::vector<Vector> zero{Vector{4.0}, Vector{9.0}};
  CHECK(msenr_db(sig2, zero) == doctest::Approx(0.0));
}

TEST_CASE("pse_probability") {
  CHECK(pse_probability({true, true, true}) == 1.0);
  CHECK(pse_probability({true, false, true, true}) == 0.75);
}

TEST_CASE("psnr") {
  const Vector x{255.0, 0.0, 10.0};
  CHECK(std::isinf(psnr(x, x)));
  const Vector off{0.0, 0.0, 10.0};
  CHECK(psnr(x, off) == doctest::Approx(0.0));
  const Vector small{255.0, 3.0, 6.0};
  CHECK(psnr(x, small) == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / 25.0)));
  CHECK_THROWS_AS(psnr(x, Vector{1.0}), InvalidArgument);
}

TEST_CASE("monte carlo: noiseless tiny suite recovers exactly with DHTP") {
  ExperimentConfig c = tiny();
  c.snr_db = {std::nullopt};
  c.trials = 20;
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) CHECK(row.failures == 0);
  CHECK(r.rows[1].algorithm == Algorithm::kDhtp);
  CHECK(r.rows[1].pse == 1.0);
  CHECK(std::isinf(r.rows[1].msenr_db));
  // Single-node HTP at M = 30 misses now and then; it must still mostly succeed.
  CHECK(r.rows[0].pse >= 0.75);
}

TEST_CASE("monte carlo: single HTP trial") {
  ExperimentConfig c = tiny();
  c.L = 1;
  c.h_kind = "right";
  c.topology_degree = 0;
  c.trials = 1;
  c.algorithms = {Algorithm::kHtp};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].pse == 1.0);
  CHECK(std::isinf(r.rows[0].msenr_db));
}

TEST_CASE("monte carlo is deterministic and thread-count independent") {
  ExperimentConfig c = tiny();
  c.snr_db = {10.0, 20.0};
  const ExperimentResult a = run_experiment(c);
  c.threads = 3;
  const ExperimentResult b = run_experiment(c);
  std::ostringstream sa, sb;
  write_results_csv(a, sa);
  write_results_csv(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.rows.size() == 6);
}

TEST_CASE("monte carlo records failures instead of aborting") {
  ExperimentConfig c = tiny();
  c.trials = 3;
  const NetworkMatrix wrong = validate(DenseMatrix::identity(3));
  CHECK_THROWS_AS(run_monte_carlo(c, wrong, std::nullopt), InvalidArgument);
  // DiHaT needs equal M at every node; its trials fail, the others do not.
  c.M = {30, 30, 30, 31};
  const auto rows = run_monte_carlo(c, build_network(c), 20.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].failures == 0);
  CHECK(rows[1].failures == 0);
  CHECK(rows[2].failures == 3);
  CHECK(std::isnan(rows[2].msenr_db));
  CHECK_FALSE(rows[2].records[0].error.empty());
}

TEST_CASE("results export round trips") {
  ExperimentConfig c = tiny();
  c.snr_db = {std::nullopt, 15.0};
  const ExperimentResult r = run_experiment(c);
  std::ostringstream csv;
  write_results_csv(r, csv);
  std::istringstream csv_in(csv.str());
  const ExperimentResult back = parse_results_csv(csv_in);
  REQUIRE(back.rows.size() == r.rows.size());
  std::ostringstream csv2;
  write_results_csv(back, csv2);
  CHECK(csv2.str() == csv.str());

  std::ostringstream jl;
  write_results_jsonl(r, jl);
  std::istringstream jl_in(jl.str());
  const ExperimentResult back2 = parse_results_jsonl(jl_in);
  std::ostringstream csv3;
  write_results_csv(back2, csv3);
  CHECK(csv3.str() == csv.str());

  std::ostringstream empty;
  write_results_csv(ExperimentResult{}, empty);
  CHECK(empty.str() == "algorithm,snr_db,s,s_assumed,trials,msenr_db,pse,mean_iters,mean_payload_scalars,failures\n");

  const auto path = std::filesystem::temp_directory_path() / "sparsemesh_results.csv";
  export_results(r, path, ResultFormat::kCsv);
  CHECK(std::filesystem::file_size(path) == csv.str().size());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(export_results(r, "/nonexistent/dir/x.csv", ResultFormat::kCsv), IoError);
}

TEST_CASE("format_real") {
  CHECK(format_real(1.0 / 3.0) == "0.333333333333");
  CHECK(format_real(INFINITY) == "inf");
  CHECK(format_real(100.0) == "100");
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\n[experiment]\nL = 4\nM = 30\nN = 60\ns = 4\nsnr_db = none, 10, 20 ; trailing\n"
      "algorithms = dhtp, htp\nh_kind = doubly\ntopology_degree = 2\ntrials = 3\nseed = 9\n");
  CHECK(c.L == 4);
  CHECK(c.snr_db.size() == 3);
  CHECK_FALSE(c.snr_db[0].has_value());
  CHECK(*c.snr_db[2] == 20.0);
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::kDhtp, Algorithm::kHtp});
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("N = ten\n"), ParseError);
  CHECK_THROWS_AS(parse_config("just words\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent.cfg"), IoError);
}

TEST_CASE("DCT round trip and DC-only spectrum") {
  const std::size_t n = 16;
  const GrayImage img = synthetic_image(n, 2);
  const Vector px = img.as_doubles();
  const Vector back = idct2(dct2(px, n), n);
  for (std::size_t i = 0; i < px.size(); ++i) CHECK(std::abs(back[i] - px[i]) < 1e-9);

  const Vector flat(n * n, 128.0);
  const Vector c = dct2(flat, n);
  CHECK(c[0] == doctest::Approx(128.0 * double(n)));
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-9);
}

TEST_CASE("zig-zag scan order") {
  const auto z = scan_order(3, Partition::kZigZag);
  CHECK(z == std::vector<std::size_t>{0, 1, 3, 6, 4, 2, 5, 7, 8});
  const auto r = scan_order(2, Partition::kRaster);
  CHECK(r == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("PGM round trip and errors") {
  const GrayImage img = synthetic_image(32, 5);
  const auto path = std::filesystem::temp_directory_path() / "sparsemesh_test.pgm";
  write_pgm(img, path);
  const GrayImage back = read_pgm(path);
  CHECK(back.width == 32);
  CHECK(back.pixels == img.pixels);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_pgm("P2\n2 2\n255\n0 0 0 0"), ParseError);
  CHECK_THROWS_AS(parse_pgm("P5\n2 2\n65535\n"), ParseError);
  CHECK_THROWS_AS(parse_pgm("P5\n2 2\n255\n\x01"), ParseError);
  const GrayImage commented = parse_pgm(std::string("P5\n# c\n2 1\n255\n") + std::string("\x05\x06", 2));
  CHECK(commented.pixels == std::vector<std::uint8_t>{5, 6});
}

TEST_CASE("image pipeline edge cases") {
  ImageConfig cfg;
  cfg.blocks = 4;
  cfg.L = 3;
  cfg.h_kind = "doubly";
  cfg.topology_degree = 1;
  const GrayImage black{16, 16, std::vector<std::uint8_t>(256, 0)};
  const ImageResult zero = image_pipeline(black, cfg);
  CHECK(std::isinf(zero.psnr_db));
  for (double v : zero.reconstruction_pixels) CHECK(v == 0.0);

  const GrayImage flat{16, 16, std::vector<std::uint8_t>(256, 128)};
  const ImageResult dc = image_pipeline(flat, cfg);
  for (double v : dc.reconstruction_pixels) CHECK(std::abs(v - 128.0) < 1e-9);

  const GrayImage wide{16, 8, std::vector<std::uint8_t>(128, 0)};
  CHECK_THROWS_AS(image_pipeline(wide, cfg), InvalidArgument);
  cfg.blocks = 7;
  CHECK_THROWS_AS(image_pipeline(flat, cfg), InvalidArgument);
}

TEST_CASE("bundled networks are rebalanced on their support") {
  const NetworkMatrix raw_d = load_fixture(fixture_dir() / "h_doubly_stochastic.txt");
  const NetworkMatrix d = build_network("fixture-doubly", 20, 3, 1);
  const NetworkMatrix raw_r = load_fixture(fixture_dir() / "h_right_stochastic.txt");
  const NetworkMatrix r = build_network("fixture-right", 20, 3, 1);
  CHECK(d.kind() == StochasticKind::kDoubly);
  for (std::size_t i = 0; i < 20; ++i) {
    double dr = 0.0, dc = 0.0, rr = 0.0;
    for (std::size_t j = 0; j < 20; ++j) {
      dr += d(i, j);
      dc += d(j, i);
      rr += r(i, j);
      CHECK((d(i, j) == 0.0) == (raw_d(i, j) == 0.0));
      CHECK((r(i, j) == 0.0) == (raw_r(i, j) == 0.0));
      CHECK(std::abs(d(i, j) - raw_d(i, j)) <= 0.011);
      CHECK(std::abs(r(i, j) - raw_r(i, j)) <= 0.011);
    }
    CHECK(std::abs(dr - 1.0) < 1e-12);
    CHECK(std::abs(dc - 1.0) < 1e-12);
    CHECK(std::abs(rr - 1.0) < 1e-12);
  }
}
