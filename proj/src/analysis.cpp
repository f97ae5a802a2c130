// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparsemesh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/parallel.hpp"

namespace sparsemesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-12;

bool violates(double lhs, double rhs) { return rhs - lhs < -kRelTol * std::max(1.0, std::abs(rhs)); }

// Extreme eigenvalues of a symmetric s x s block.
std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& block) {
  const Eigen::Index s = block.rows();
  if (s == 1) return {block(0, 0), block(0, 0)};
  if (s == 2) {
    const double mean = 0.5 * (block(0, 0) + block(1, 1));
    const double half = 0.5 * (block(0, 0) - block(1, 1));
    const double r = std::sqrt(half * half + block(0, 1) * block(0, 1));
    return {mean - r, mean + r};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(s - 1)};
}

struct RicPartial {
  double delta = -kInf;
  std::vector<std::size_t> support;
  bool aborted = false;
};

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (out > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    out = out * num / i;
  }
  return out;
}

RicReport exact_ric(const DenseMatrix& a, std::size_t s, std::optional<double> abort_above, std::size_t threads) {
  const std::size_t n = a.cols();
  if (s == 0 || s > n) throw InvalidArgument("RIC order must be in [1, N]");
  const std::uint64_t count = binomial(n, s);
  if (count > kRicEnumerationCap) {
    throw RicTooLarge("C(" + std::to_string(n) + ", " + std::to_string(s) + ") = " + std::to_string(count) +
                      " supports exceeds the enumeration cap of " + std::to_string(kRicEnumerationCap));
  }
  const auto am = a.as_eigen();
  const Eigen::MatrixXd gram = am.transpose() * am;

  // Partition by the first index of the combination.
  const std::size_t first_choices = n - s + 1;
  std::vector<RicPartial> partials(first_choices);
  parallel_for(first_choices, threads, [&](std::size_t first) {
    RicPartial& best = partials[first];
    std::vector<std::size_t> comb(s);
    comb[0] = first;
    for (std::size_t i = 1; i < s; ++i) comb[i] = first + i;
    Eigen::MatrixXd block(s, s);
    while (true) {
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i; j < s; ++j) {
          block(Eigen::Index(i), Eigen::Index(j)) = gram(Eigen::Index(comb[i]), Eigen::Index(comb[j]));
          block(Eigen::Index(j), Eigen::Index(i)) = block(Eigen::Index(i), Eigen::Index(j));
        }
      }
      const auto [lo, hi] = extreme_eigenvalues(block);
      const double d = std::max(hi - 1.0, 1.0 - lo);
      if (d > best.delta) {
        best.delta = d;
        best.support = comb;
      }
      if (abort_above && d > *abort_above) {
        best.aborted = true;
        return;
      }
      // Advance the tail comb[1..s) lexicographically, keeping comb[0] fixed.
      std::size_t i = s;
      while (i > 1 && comb[i - 1] == n - s + (i - 1)) --i;
      if (i <= 1) return;
      ++comb[i - 1];
      for (std::size_t j = i; j < s; ++j) comb[j] = comb[j - 1] + 1;
    }
  });

  RicReport report;
  report.order = s;
  RicPartial best;
  for (auto& p : partials) {
    report.aborted |= p.aborted;
    if (p.support.empty()) continue;
    if (p.delta > best.delta || (p.delta == best.delta && lex_less(p.support, best.support))) best = p;
  }
  report.delta = best.delta;
  report.argmax_support = SupportSet(best.support, n);
  return report;
}

NetworkRic network_ric(std::span<const NodeData> nodes, std::size_t s, std::optional<double> abort_above,
                       std::size_t threads) {
  NetworkRic out;
  for (const auto& node : nodes) {
    const RicReport r1 = exact_ric(node.a, s, abort_above, threads);
    const RicReport r2 = exact_ric(node.a, 2 * s, abort_above, threads);
    const RicReport r3 = exact_ric(node.a, 3 * s, abort_above, threads);
    out.delta_s = std::max(out.delta_s, r1.delta);
    out.delta_2s = std::max(out.delta_2s, r2.delta);
    out.delta_3s = std::max(out.delta_3s, r3.delta);
    out.aborted |= r1.aborted || r2.aborted || r3.aborted;
    if (abort_above && out.delta_3s > *abort_above) {
      out.aborted = true;
      break;
    }
  }
  // Lower-bounded orders can break monotonicity; restore it.
  out.delta_2s = std::max(out.delta_2s, out.delta_s);
  out.delta_3s = std::max(out.delta_3s, out.delta_2s);
  return out;
}

TheoremConstants TheoremConstants::vacuous_for(double delta_s, double delta_2s, double delta_3s) {
  TheoremConstants c;
  c.delta_s = delta_s;
  c.delta_2s = delta_2s;
  c.delta_3s = delta_3s;
  c.c1 = c.c2 = c.c3 = c.d1 = c.d2 = c.d3 = c.d4 = c.d5 = kInf;
  c.gamma = 0.0;
  c.c_iters = c.d_thm2 = c.d_thm3 = kInf;
  c.vacuous = true;
  return c;
}

TheoremConstants theorem_constants(double delta_s, double delta_2s, double delta_3s) {
  if (!(0.0 <= delta_s && delta_s <= delta_2s && delta_2s <= delta_3s && delta_3s < 1.0)) {
    throw InvalidArgument("RIC values must satisfy 0 <= delta_s <= delta_2s <= delta_3s < 1");
  }
  TheoremConstants c;
  c.delta_s = delta_s;
  c.delta_2s = delta_2s;
  c.delta_3s = delta_3s;
  const double d3s2 = delta_3s * delta_3s;

  c.c1 = std::sqrt(8.0 * d3s2 / (1.0 - delta_2s * delta_2s));
  c.c2 = std::sqrt(2.0 * d3s2 * (3.0 - d3s2) / (1.0 - d3s2));
  c.c3 = std::sqrt(16.0 * d3s2 / ((1.0 - d3s2) * (1.0 - d3s2)));
  c.d1 = (2.0 * std::sqrt(2.0 * (1.0 - delta_2s)) + 2.0 * std::sqrt(1.0 + delta_s)) / (1.0 - delta_2s);
  c.d2 = 2.0 * delta_3s * std::sqrt(2.0 * (1.0 + delta_s)) / (1.0 - delta_2s);
  c.d3 = std::sqrt(2.0 * (1.0 + delta_2s));
  c.d4 = 2.0 * c.d2 / std::sqrt(1.0 - d3s2) + c.d1 / std::sqrt(2.0);
  c.converges = c.c1 < 1.0;
  c.in_guarantee_regime = delta_3s < kGuaranteeDelta;
  c.d_thm2 = 4.0 / std::sqrt(1.0 - delta_3s);

  if (c.converges) {
    c.d5 = c.c3 * (c.d2 + c.d3) / (1.0 - c.c1) + c.d4;
    c.gamma = (2.0 * std::sqrt(2.0) - 1.0) / (4.0 * c.d5);
    c.d_thm3 = 1.0 + c.c2 * c.d1 / (1.0 - c.c1) + c.d4;
    if (c.c1 > 0.0) {
      c.c_iters = std::log(16.0 * c.c3 * c.c3 / std::pow(c.c1, 4)) / std::log(1.0 / (c.c1 * c.c1));
    } else {
      c.c_iters = 1.0;  // limit as delta_3s -> 0
    }
  } else {
    c.d5 = kInf;
    c.gamma = 0.0;
    c.d_thm3 = kInf;
    c.c_iters = kInf;
  }
  return c;
}

TheoremConstants constants_or_vacuous(double delta_s, double delta_2s, double delta_3s) {
  if (delta_3s >= 1.0) return TheoremConstants::vacuous_for(delta_s, delta_2s, delta_3s);
  return theorem_constants(delta_s, delta_2s, delta_3s);
}

IterationBound theorem3_iterations(double delta_s, double delta_2s, double delta_3s, double snr_db) {
  if (!(delta_3s < kGuaranteeDelta)) {
    throw NoGuarantee("iteration bound requires delta_3s < 1/3");
  }
  const TheoremConstants c = theorem_constants(delta_s, delta_2s, delta_3s);
  if (!c.converges) throw NoGuarantee("c1 >= 1: no convergence guarantee");
  IterationBound out;
  out.ratio = std::pow(10.0, snr_db / 10.0);
  if (out.ratio <= 1.0) {
    out.degenerate = true;
    return out;
  }
  const double k = std::log(out.ratio) / std::log(1.0 / c.c1);
  out.iterations = static_cast<std::size_t>(std::ceil(k));
  return out;
}

std::string_view to_string(Regime regime) {
  return regime == Regime::kInGuarantee ? "in guarantee regime" : "outside guarantee regime";
}

std::size_t BoundReport::violations() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const BoundRow& r) { return r.violated; }));
}

std::size_t BoundReport::in_regime_violations() const {
  return static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(), [](const BoundRow& r) { return r.violated && r.regime == Regime::kInGuarantee; }));
}

double BoundReport::min_slack() const {
  double m = kInf;
  for (const auto& r : rows) m = std::min(m, r.slack);
  return m;
}

BoundReport check_recurrence(const IterationTrace& trace, const SparseVector& truth,
                             std::span<const double> noise_norms, const NetworkMatrix& h,
                             const TheoremConstants& constants) {
  if (!trace.vectors_recorded) throw InvalidArgument("recurrence check needs a trace with recorded vectors");
  if (trace.dim != truth.dim()) throw InvalidArgument("trace and truth dimensions differ");
  if (noise_norms.size() != trace.nodes || h.size() != trace.nodes) {
    throw InvalidArgument("noise norms / network size do not match the trace");
  }
  const Vector w = column_weights(h);
  const Regime regime = constants.in_guarantee_regime ? Regime::kInGuarantee : Regime::kOutside;
  double noise_term = 0.0;
  for (std::size_t l = 0; l < trace.nodes; ++l) noise_term += w[l] * noise_norms[l];

  std::vector<double> prev_err(trace.nodes, truth.norm());
  BoundReport report;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    BoundRow row;
    row.iter = k + 1;
    row.regime = regime;
    double weighted_prev = 0.0;
    for (std::size_t l = 0; l < trace.nodes; ++l) weighted_prev += w[l] * prev_err[l];
    for (std::size_t l = 0; l < trace.nodes; ++l) {
      const double e = distance(trace.rounds[k][l].estimate.view(), truth.view());
      row.lhs += e;
      prev_err[l] = e;
    }
    if (constants.vacuous) {
      row.rhs = kInf;
    } else {
      // 0 * inf would be NaN when a term vanishes.
      row.rhs = (weighted_prev == 0.0 ? 0.0 : constants.c1 * weighted_prev) +
                (noise_term == 0.0 ? 0.0 : constants.d1 * noise_term);
    }
    row.slack = row.rhs - row.lhs;
    row.violated = violates(row.lhs, row.rhs);
    report.rows.push_back(row);
  }
  return report;
}

StackedBoundReport check_corollary_stacked(std::span<const SparseVector> estimates, const SparseVector& truth,
                                           std::span<const double> noise_norms,
                                           const TheoremConstants& constants) {
  if (estimates.size() != noise_norms.size()) throw InvalidArgument("one noise norm per node required");
  StackedBoundReport out;
  double err2 = 0.0;
  double noise2 = 0.0;
  double noise_max = 0.0;
  for (std::size_t l = 0; l < estimates.size(); ++l) {
    if (estimates[l].dim() != truth.dim()) throw InvalidArgument("estimate and truth dimensions differ");
    const double e = distance(estimates[l].view(), truth.view());
    err2 += e * e;
    noise2 += noise_norms[l] * noise_norms[l];
    noise_max = std::max(noise_max, noise_norms[l]);
  }
  out.lhs = std::sqrt(err2);
  out.rhs = noise2 == 0.0 ? 0.0 : constants.d_thm2 * std::sqrt(noise2);
  out.rhs_per_node_sum =
      noise_max == 0.0 ? 0.0 : constants.d_thm2 * std::sqrt(double(estimates.size())) * noise_max;
  out.slack = out.rhs - out.lhs;
  out.regime = constants.in_guarantee_regime ? Regime::kInGuarantee : Regime::kOutside;
  return out;
}

SupportBoundReport check_support_theorem(std::span<const SparseVector> estimates, const SparseVector& truth,
                                         std::size_t s, std::span<const double> noise_norms,
                                         const TheoremConstants& constants) {
  if (estimates.size() != noise_norms.size()) throw InvalidArgument("one noise norm per node required");
  SupportBoundReport out;
  const SupportSet true_support = supp_top_k(truth.view(), s);
  double smallest = kInf;
  for (std::size_t i : true_support) smallest = std::min(smallest, std::abs(truth[i]));
  const double noise_max = noise_norms.empty() ? 0.0 : *std::max_element(noise_norms.begin(), noise_norms.end());
  out.noise_condition = noise_max <= constants.gamma * smallest;
  out.supports_exact = true;
  for (const auto& est : estimates) {
    out.supports_exact &= est.support() == true_support;
    out.max_error = std::max(out.max_error, distance(est.view(), truth.view()));
  }
  out.error_bound = noise_max == 0.0 ? 0.0 : constants.d_thm2 * noise_max;
  // Noiseless exact recovery leaves rounding-level error against a zero bound.
  if (noise_max == 0.0) out.error_bound = 1e-9 * std::max(1.0, truth.norm());
  return out;
}

PrunedEnergy pruned_energy(std::span<const double> x, std::size_t s1, std::span<const double> z) {
  if (x.size() != z.size()) throw InvalidArgument("dimension mismatch");
  const SparseVector zv{Vector(z.begin(), z.end())};
  const SupportSet s2 = zv.support();
  if (s2.size() < s1) throw InvalidArgument("z must have at least s1 nonzeros");
  const SupportSet kept = supp_top_k(z, s1);
  PrunedEnergy out;
  double pruned = 0.0;
  double on_support = 0.0;
  for (std::size_t i : s2) {
    const double d = x[i] - z[i];
    on_support += d * d;
    if (!kept.contains(i)) pruned += x[i] * x[i];
  }
  out.pruned = std::sqrt(pruned);
  out.on_support = std::sqrt(2.0) * std::sqrt(on_support);
  out.total = std::sqrt(2.0) * distance(x, z);
  return out;
}

bool LemmaReport::all_hold() const {
  return std::all_of(lemmas.begin(), lemmas.end(), [](const LemmaStats& l) { return l.violations == 0; });
}

namespace {

void record(LemmaStats& stats, double lhs, double rhs) {
  const double rel = (rhs - lhs) / std::max(1.0, std::abs(rhs));
  if (stats.trials == 0 || rel < stats.worst_slack) stats.worst_slack = rel;
  ++stats.trials;
  if (violates(lhs, rhs)) ++stats.violations;
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

LemmaReport verify_lemmas(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LemmaReport report;

  // Projection bound: y = A x + e, x s1-sparse, least squares on a random
  // support S of size s2, checked against exact RICs of this A.
  {
    LemmaStats stats{.name = "least-squares projection bound"};
    constexpr std::size_t kM = 40, kN = 10;
    std::size_t attempts = 0;
    while (stats.trials < trials && attempts < 20 * trials) {
      ++attempts;
      const std::size_t s1 = 1 + rng() % 3;
      const std::size_t s2 = 1 + rng() % 3;
      Vector data(kM * kN);
      for (double& v : data) v = gauss(rng) / std::sqrt(double(kM));
      const DenseMatrix a(kM, kN, std::move(data));
      const double delta_sum = exact_ric(a, s1 + s2).delta;
      if (delta_sum >= 1.0) {
        ++stats.skipped;
        continue;
      }
      const double delta_s2 = exact_ric(a, s2).delta;
      SparseVector x(kN);
      for (std::size_t i : random_subset(kN, s1, rng)) x[i] = gauss(rng);
      const double noise_scale = unif(rng) < 0.2 ? 0.0 : std::pow(10.0, -3.0 * unif(rng));
      Vector y(kM);
      for (std::size_t r = 0; r < kM; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < kN; ++c) acc += a(r, c) * x[c];
        y[r] = acc;
      }
      Vector e(kM);
      for (std::size_t r = 0; r < kM; ++r) {
        e[r] = noise_scale * gauss(rng);
        y[r] += e[r];
      }
      const SupportSet support(random_subset(kN, s2, rng), kN);
      const SparseVector xbar = least_squares_on_support(a, y, support);
      double off = 0.0;
      for (std::size_t i : support.complement()) off += x[i] * x[i];
      const double lhs = distance(x.view(), xbar.view());
      const double rhs = std::sqrt(1.0 / (1.0 - delta_sum * delta_sum)) * std::sqrt(off) +
                         std::sqrt(1.0 + delta_s2) / (1.0 - delta_sum) * norm2(e);
      record(stats, lhs, rhs);
    }
    report.lemmas.push_back(stats);
  }

  // Sum of squares: (ax + by)^2 + (cx + dy)^2 <= (sqrt(a^2 + c^2) x + (b + d) y)^2.
  {
    LemmaStats stats{.name = "sum-of-squares inequality"};
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t t = 0; t < trials; ++t) {
      double v[6];
      for (double& x : v) x = unif(rng) < 0.1 ? 0.0 : expo(rng);
      const auto [a, b, c, d, x, y] = v;
      const double lhs = (a * x + b * y) * (a * x + b * y) + (c * x + d * y) * (c * x + d * y);
      const double root = std::sqrt(a * a + c * c) * x + (b + d) * y;
      record(stats, lhs, root * root);
    }
    report.lemmas.push_back(stats);
  }

  // Pruned-index energy: ||x_{S_nabla}|| <= sqrt(2) ||(x - z)_{S2}|| <= sqrt(2) ||x - z||.
  {
    LemmaStats stats{.name = "pruned-index energy bound"};
    constexpr std::size_t kN = 30;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t s1 = 1 + rng() % 8;
      const std::size_t s2 = s1 + rng() % 8;
      Vector x(kN, 0.0);
      for (std::size_t i : random_subset(kN, s1, rng)) x[i] = gauss(rng);
      Vector z(kN, 0.0);
      if (rng() % 2 == 0) {
        for (std::size_t i : random_subset(kN, s2, rng)) z[i] = gauss(rng);
      } else {
        // z near x: x's support plus extras, perturbed.
        const double eps = std::pow(10.0, -2.0 * unif(rng));
        std::size_t placed = 0;
        for (std::size_t i = 0; i < kN && placed < s2; ++i) {
          if (x[i] != 0.0) {
            z[i] = x[i] + eps * gauss(rng);
            ++placed;
          }
        }
        for (std::size_t i : random_subset(kN, kN, rng)) {
          if (placed == s2) break;
          if (z[i] == 0.0) {
            z[i] = eps * gauss(rng);
            ++placed;
          }
        }
      }
      if (SparseVector(z).nnz() < s1) continue;
      const PrunedEnergy pe = pruned_energy(x, s1, z);
      record(stats, pe.pruned, pe.on_support);
      if (violates(pe.on_support, pe.total)) ++stats.violations;
    }
    report.lemmas.push_back(stats);
  }
  return report;
}

void write_bound_csv(const BoundReport& report, std::ostream& out) {
  out << "iter,lhs,rhs,slack,regime\n" << std::setprecision(12);
  for (const auto& r : report.rows) {
    out << r.iter << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ',' << to_string(r.regime) << '\n';
  }
}

}  // namespace sparsemesh
