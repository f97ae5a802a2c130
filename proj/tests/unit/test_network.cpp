// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sparsemesh/errors.hpp"
#include "sparsemesh/network.hpp"

using namespace sparsemesh;

namespace {

double row_sum(const NetworkMatrix& h, std::size_t r) {
  double s = 0.0;
  for (std::size_t c = 0; c < h.size(); ++c) s += h(r, c);
  return s;
}

double col_sum(const NetworkMatrix& h, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < h.size(); ++r) s += h(r, c);
  return s;
}

}  // namespace

TEST_CASE("validate classifies matrices") {
  CHECK(validate(DenseMatrix::identity(20)).kind() == StochasticKind::kDoubly);
  const auto right = DenseMatrix::from_rows({{0.5, 0.5}, {0.2, 0.8}});
  CHECK(validate(right).kind() == StochasticKind::kRight);
  CHECK_THROWS_AS(validate(right, StochasticKind::kDoubly), StochasticityError);
  const auto off = DenseMatrix::from_rows({{0.5, 0.6}, {0.4, 0.5}});
  CHECK_THROWS_AS(validate(off, StochasticKind::kRight), StochasticityError);
  CHECK(validate(off).kind() == StochasticKind::kGeneral);
  const auto neg = DenseMatrix::from_rows({{1.5, -0.5}, {0.0, 1.0}});
  try {
    validate(neg);
    FAIL("expected NotNonnegativeError");
  } catch (const NotNonnegativeError& e) {
    CHECK(e.row() == 0);
    CHECK(e.col() == 1);
  }
}

TEST_CASE("bundled fixtures load with their stated kinds") {
  const NetworkMatrix right = load_fixture(fixture_dir() / "h_right_stochastic.txt", StochasticKind::kRight);
  CHECK(right.size() == 20);
  for (std::size_t r = 0; r < 20; ++r) CHECK(std::abs(row_sum(right, r) - 1.0) <= 0.01);
  const Vector w = column_weights(right);
  for (double v : w) {
    CHECK(v > 0.0);
    CHECK(v < 20.0);
  }

  const NetworkMatrix doubly = load_fixture(fixture_dir() / "h_doubly_stochastic.txt", StochasticKind::kDoubly);
  CHECK(doubly.size() == 20);
  CHECK(doubly.kind() == StochasticKind::kDoubly);
  for (std::size_t c = 0; c < 20; ++c) CHECK(std::abs(col_sum(doubly, c) - 1.0) <= 0.011);
}

TEST_CASE("parse errors on malformed matrix text") {
  CHECK_THROWS_AS(parse_matrix_text("0.5 0.5\n0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix_text("0.5 x\n0.5 0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix_text("0.5 0.5 0.0\n0.5 0.5 0.0\n"), ParseError);
  const DenseMatrix ok = parse_matrix_text("# comment\n1 0\n0 1\n");
  CHECK(ok.rows() == 2);

  const auto path = std::filesystem::temp_directory_path() / "sparsemesh_truncated.txt";
  std::ofstream(path) << "0.5 0.5\n0.5";
  CHECK_THROWS_AS(load_fixture(path), ParseError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_fixture("/nonexistent/h.txt"), IoError);
}

TEST_CASE("generate_topology") {
  const Topology t = generate_topology(20, 3, 7);
  for (std::size_t l = 0; l < 20; ++l) {
    CHECK(t.neighbors(l).size() == 4);
    CHECK(t.has_edge(l, l));
  }
  CHECK(t == generate_topology(20, 3, 7));
  CHECK_FALSE(t == generate_topology(20, 3, 8));
  const Topology iso = generate_topology(5, 0, 1);
  for (std::size_t l = 0; l < 5; ++l) CHECK(iso.neighbors(l) == std::vector<std::size_t>{l});
  CHECK_THROWS_AS(generate_topology(4, 4, 1), InvalidArgument);
}

TEST_CASE("row_normalize") {
  const NetworkMatrix one = row_normalize(Topology(std::vector<std::vector<std::size_t>>(1)));
  CHECK(one(0, 0) == 1.0);
  DenseMatrix equal = DenseMatrix::from_rows({{1, 1}, {1, 1}});
  const NetworkMatrix two = row_normalize(Topology({{1}, {0}}), equal);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(two(r, c) == 0.5);
  const NetworkMatrix rnd = row_normalize(generate_topology(20, 3, 2), std::nullopt, 9);
  CHECK(rnd.kind() != StochasticKind::kGeneral);
  for (std::size_t r = 0; r < 20; ++r) CHECK(std::abs(row_sum(rnd, r) - 1.0) < 1e-12);
}

TEST_CASE("sinkhorn_balance") {
  const NetworkMatrix half = sinkhorn_balance(Topology({{1}, {0}}));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(half(r, c) == doctest::Approx(0.5).epsilon(1e-15));
  const NetworkMatrix id = sinkhorn_balance(Topology(std::vector<std::vector<std::size_t>>(3)));
  CHECK(id.matrix() == DenseMatrix::identity(3));

  const NetworkMatrix big = sinkhorn_balance(generate_topology(20, 4, 3).symmetrized(), 10000, 1e-12, 5);
  CHECK(big.kind() == StochasticKind::kDoubly);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::abs(row_sum(big, i) - 1.0) < 1e-8);
    CHECK(std::abs(col_sum(big, i) - 1.0) < 1e-8);
  }
  for (double w : column_weights(big)) CHECK(w == doctest::Approx(1.0));

  // Upper-triangular support has no doubly stochastic scaling.
  try {
    sinkhorn_balance(Topology({{1}, {}}), 200);
    FAIL("expected BalancingFailed");
  } catch (const BalancingFailed& e) {
    CHECK(e.deviation() > 0.0);
  }
}

TEST_CASE("neighbour queries") {
  const auto m = DenseMatrix::from_rows({{0.5, 0.5, 0.0}, {0.0, 1.0, 0.0}, {0.25, 0.25, 0.5}});
  const NetworkMatrix h = validate(m);
  CHECK(h.in_neighbors(0) == std::vector<std::size_t>{0, 1});
  CHECK(h.listeners(0) == 1);  // node 2 reads node 0
  CHECK(h.listeners(1) == 2);
  CHECK(h.listeners(2) == 0);
}

TEST_CASE("save and reload round trip") {
  const NetworkMatrix h = sinkhorn_balance(generate_topology(6, 2, 4).symmetrized());
  const auto path = std::filesystem::temp_directory_path() / "sparsemesh_h.txt";
  save_matrix(h, path);
  const NetworkMatrix back = load_fixture(path, StochasticKind::kDoubly);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(back(r, c) == doctest::Approx(h(r, c)).epsilon(1e-12));
  std::filesystem::remove(path);
}
