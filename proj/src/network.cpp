// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparsemesh/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "sparsemesh/errors.hpp"

namespace sparsemesh {

std::string_view to_string(StochasticKind kind) {
  switch (kind) {
    case StochasticKind::kDoubly: return "doubly-stochastic";
    case StochasticKind::kRight: return "right-stochastic";
    case StochasticKind::kGeneral: return "general-nonnegative";
  }
  return "unknown";
}

std::vector<std::size_t> NetworkMatrix::in_neighbors(std::size_t l) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < size(); ++r) {
    if (h_(l, r) != 0.0) out.push_back(r);
  }
  return out;
}

std::size_t NetworkMatrix::listeners(std::size_t l) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < size(); ++r) {
    if (r != l && h_(r, l) != 0.0) ++n;
  }
  return n;
}

NetworkMatrix validate(const DenseMatrix& h, StochasticKind expected, double tol) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw InvalidArgument("network matrix must be square and non-empty");
  }
  const std::size_t n = h.rows();
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t r = 0; r < n; ++r) {
      const double v = h(l, r);
      if (!std::isfinite(v) || v < 0.0) {
        throw NotNonnegativeError("network matrix entry (" + std::to_string(l) + ", " +
                                      std::to_string(r) + ") is negative or non-finite",
                                  l, r);
      }
    }
  }
  double worst_row = 0.0;
  std::size_t worst_row_idx = 0;
  double worst_col = 0.0;
  std::size_t worst_col_idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double rs = 0.0;
    double cs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rs += h(i, j);
      cs += h(j, i);
    }
    if (std::abs(rs - 1.0) > worst_row) {
      worst_row = std::abs(rs - 1.0);
      worst_row_idx = i;
    }
    if (std::abs(cs - 1.0) > worst_col) {
      worst_col = std::abs(cs - 1.0);
      worst_col_idx = i;
    }
  }
  StochasticKind kind = StochasticKind::kGeneral;
  if (worst_row <= tol) kind = worst_col <= tol ? StochasticKind::kDoubly : StochasticKind::kRight;

  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  };
  if (expected != StochasticKind::kGeneral && worst_row > tol) {
    throw StochasticityError("row " + std::to_string(worst_row_idx) + " sum deviates from 1 by " +
                             fmt(worst_row) + " (tolerance " + fmt(tol) + ")");
  }
  if (expected == StochasticKind::kDoubly && worst_col > tol) {
    throw StochasticityError("column " + std::to_string(worst_col_idx) + " sum deviates from 1 by " +
                             fmt(worst_col) + " (tolerance " + fmt(tol) + ")");
  }
  return NetworkMatrix(h, kind);
}

Topology::Topology(std::vector<std::vector<std::size_t>> neighbors) : neighbors_(std::move(neighbors)) {
  const std::size_t n = neighbors_.size();
  for (std::size_t l = 0; l < n; ++l) {
    auto& nb = neighbors_[l];
    nb.push_back(l);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (nb.back() >= n) throw InvalidArgument("neighbor index out of range");
  }
}

bool Topology::has_edge(std::size_t l, std::size_t r) const {
  return std::binary_search(neighbors_[l].begin(), neighbors_[l].end(), r);
}

Topology Topology::symmetrized() const {
  std::vector<std::vector<std::size_t>> nb = neighbors_;
  for (std::size_t l = 0; l < neighbors_.size(); ++l) {
    for (std::size_t r : neighbors_[l]) nb[r].push_back(l);
  }
  return Topology(std::move(nb));
}

Topology generate_topology(std::size_t nodes, std::size_t extra_degree, std::uint64_t seed) {
  if (nodes == 0) throw InvalidArgument("topology needs at least one node");
  if (extra_degree >= nodes) {
    throw InvalidArgument("extra degree " + std::to_string(extra_degree) + " must be below node count " +
                          std::to_string(nodes));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> nb(nodes);
  std::vector<std::size_t> others;
  for (std::size_t l = 0; l < nodes; ++l) {
    others.clear();
    for (std::size_t r = 0; r < nodes; ++r) {
      if (r != l) others.push_back(r);
    }
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < extra_degree; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
      std::swap(others[i], others[pick(rng)]);
    }
    nb[l].assign(others.begin(), others.begin() + std::ptrdiff_t(extra_degree));
  }
  return Topology(std::move(nb));
}

Topology topology_of(const NetworkMatrix& h) {
  std::vector<std::vector<std::size_t>> nb(h.size());
  for (std::size_t l = 0; l < h.size(); ++l) nb[l] = h.in_neighbors(l);
  return Topology(std::move(nb));
}

NetworkMatrix row_normalize(const Topology& topology, const std::optional<DenseMatrix>& weights,
                            std::uint64_t seed) {
  const std::size_t n = topology.size();
  if (n == 0) throw InvalidArgument("empty topology");
  if (weights && (weights->rows() != n || weights->cols() != n)) {
    throw InvalidArgument("weight matrix does not match topology size");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DenseMatrix h(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const auto& nb = topology.neighbors(l);
    if (nb.empty()) throw InvalidArgument("node " + std::to_string(l) + " has no neighbors");
    double total = 0.0;
    for (std::size_t r : nb) {
      double w = weights ? (*weights)(l, r) : 0.0;
      if (!weights) {
        do {
          w = unif(rng);
        } while (w == 0.0);
      }
      if (!(w >= 0.0)) throw InvalidArgument("raw weights must be nonnegative");
      h(l, r) = w;
      total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("node " + std::to_string(l) + " has zero total weight");
    for (std::size_t r : nb) h(l, r) /= total;
  }
  return validate(h, StochasticKind::kRight, kProgrammaticTolerance);
}

NetworkMatrix sinkhorn_balance(const Topology& topology, std::size_t max_iters, double tol,
                               std::optional<std::uint64_t> seed) {
  const std::size_t n = topology.size();
  DenseMatrix h(n, n);
  std::mt19937_64 rng(seed.value_or(0));
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t r : topology.neighbors(l)) h(l, r) = seed ? unif(rng) : 1.0;
  }
  return sinkhorn_balance(h, max_iters, tol);
}

NetworkMatrix sinkhorn_balance(DenseMatrix h, std::size_t max_iters, double tol) {
  const std::size_t n = h.rows();
  if (h.cols() != n) throw InvalidArgument("sinkhorn_balance: matrix must be square");
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t r = 0; r < n; ++r) {
      if (!(h(l, r) >= 0.0)) throw NotNonnegativeError("sinkhorn_balance: negative start entry", l, r);
    }
  }
  Vector sums(n);
  double deviation = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t l = 0; l < n; ++l) {
      double rs = 0.0;
      for (std::size_t r = 0; r < n; ++r) rs += h(l, r);
      for (std::size_t r = 0; r < n; ++r) h(l, r) /= rs;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t r = 0; r < n; ++r) sums[r] += h(l, r);
    }
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t r = 0; r < n; ++r) h(l, r) /= sums[r];
    }
    // Columns are now exact up to rounding; measure the row deviation.
    deviation = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      double rs = 0.0;
      double cs = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        rs += h(l, r);
        cs += h(r, l);
      }
      deviation = std::max({deviation, std::abs(rs - 1.0), std::abs(cs - 1.0)});
    }
    if (deviation < tol) return validate(h, StochasticKind::kDoubly, std::max(tol, kProgrammaticTolerance));
  }
  std::ostringstream os;
  os << "Sinkhorn balancing did not converge in " << max_iters << " iterations (deviation "
     << std::setprecision(6) << deviation << ")";
  throw BalancingFailed(os.str(), deviation);
}

Vector column_weights(const NetworkMatrix& h) {
  Vector w(h.size(), 0.0);
  for (std::size_t r = 0; r < h.size(); ++r) {
    for (std::size_t l = 0; l < h.size(); ++l) w[l] += h(r, l);
  }
  return w;
}

DenseMatrix parse_matrix_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Vector> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Vector row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw ParseError("line " + std::to_string(lineno) + ": cannot parse '" + tok + "' as a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix text contains no rows");
  const std::size_t n = rows.size();
  Vector data;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                       " entries, expected " + std::to_string(n));
    }
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
  try {
    return DenseMatrix(n, n, std::move(data));
  } catch (const NumericError& e) {
    throw ParseError(e.what());
  }
}

NetworkMatrix load_fixture(const std::filesystem::path& path, StochasticKind expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return validate(parse_matrix_text(buf.str()), expected, kFixtureTolerance);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_matrix(const NetworkMatrix& h, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# " << to_string(h.kind()) << " network matrix, L=" << h.size() << "\n";
  out << std::setprecision(17);
  for (std::size_t l = 0; l < h.size(); ++l) {
    for (std::size_t r = 0; r < h.size(); ++r) out << (r ? " " : "") << h(l, r);
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("SPARSEMESH_FIXTURES"); env && *env) return env;
  return SPARSEMESH_DEFAULT_FIXTURES;
}

}  // namespace sparsemesh
