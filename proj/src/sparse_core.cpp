// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparsemesh/sparse_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "sparsemesh/errors.hpp"
#include "sparsemesh/kernels.hpp"

namespace sparsemesh {

SupportSet::SupportSet(std::vector<std::size_t> indices, std::size_t dim)
    : indices_(std::move(indices)), dim_(dim) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InvalidArgument("support set contains duplicate indices");
  }
  if (!indices_.empty() && indices_.back() >= dim_) {
    throw InvalidArgument("support index " + std::to_string(indices_.back()) +
                          " out of range for dimension " + std::to_string(dim_));
  }
}

bool SupportSet::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SupportSet SupportSet::complement() const {
  std::vector<std::size_t> out;
  out.reserve(dim_ - indices_.size());
  auto it = indices_.begin();
  for (std::size_t i = 0; i < dim_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return SupportSet(std::move(out), dim_);
}

SupportSet SparseVector::support() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0) idx.push_back(i);
  }
  return SupportSet(std::move(idx), values_.size());
}

std::size_t SparseVector::nnz() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double SparseVector::norm() const { return norm2(values_); }

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("matrix data has " + std::to_string(data_.size()) +
                          " entries, expected " + std::to_string(rows_ * cols_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw NumericError("matrix contains a non-finite entry");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Vector data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidArgument("ragged matrix rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

Eigen::MatrixXd DenseMatrix::columns(const SupportSet& support) const {
  Eigen::MatrixXd out(rows_, support.size());
  Eigen::Index j = 0;
  for (std::size_t c : support) {
    for (std::size_t r = 0; r < rows_; ++r) out(Eigen::Index(r), j) = data_[r * cols_ + c];
    ++j;
  }
  return out;
}

SupportSet supp_top_k(std::span<const double> v, std::size_t s) {
  if (s > v.size()) {
    throw InvalidArgument("requested " + std::to_string(s) + " largest entries of a vector of length " +
                          std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("non-finite entry in support selection");
  }
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Strict total order: larger magnitude first, then lower index.
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma > mb || (ma == mb && a < b);
  };
  if (s < order.size()) {
    std::nth_element(order.begin(), order.begin() + std::ptrdiff_t(s), order.end(), before);
  }
  order.resize(s);
  return SupportSet(std::move(order), v.size());
}

SparseVector restrict_to(std::span<const double> v, const SupportSet& support) {
  SparseVector out(v.size());
  for (std::size_t i : support) out[i] = v[i];
  return out;
}

SparseVector hard_threshold(std::span<const double> v, std::size_t s) {
  return restrict_to(v, supp_top_k(v, s));
}

SparseVector least_squares_on_support(const DenseMatrix& a, std::span<const double> y,
                                      const SupportSet& support) {
  if (y.size() != a.rows()) throw InvalidArgument("observation length does not match matrix rows");
  if (support.dim() != a.cols()) throw InvalidArgument("support dimension does not match matrix columns");
  if (support.size() > a.rows()) {
    throw SingularSystemError("support larger than the number of observations", support.indices());
  }
  SparseVector out(a.cols());
  if (support.empty()) return out;

  const Eigen::MatrixXd sub = a.columns(support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  const double smallest = diag.minCoeff();
  if (!(largest > 0.0) || smallest < kRankTolerance * largest) {
    throw SingularSystemError("rank-deficient least-squares system on support", support.indices());
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), Eigen::Index(y.size()));
  const Eigen::VectorXd z = qr.solve(rhs);
  Eigen::Index j = 0;
  for (std::size_t i : support) out[i] = z(j++);
  return out;
}

Vector residual(const DenseMatrix& a, std::span<const double> y, std::span<const double> x) {
  if (x.size() != a.cols() || y.size() != a.rows()) {
    throw InvalidArgument("dimension mismatch in residual");
  }
  Vector r(a.rows());
  simd::gemv(a.data(), a.rows(), a.cols(), x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return r;
}

Vector gradient_proxy(const DenseMatrix& a, std::span<const double> y,
                      std::span<const double> x_prev) {
  const Vector r = residual(a, y, x_prev);
  Vector proxy(a.cols());
  simd::gemv_t(a.data(), a.rows(), a.cols(), r, proxy);
  for (std::size_t i = 0; i < proxy.size(); ++i) proxy[i] += x_prev[i];
  return proxy;
}

SupportSet gradient_support_step(const DenseMatrix& a, std::span<const double> y,
                                 std::span<const double> x_prev, std::size_t s) {
  return supp_top_k(gradient_proxy(a, y, x_prev), s);
}

double norm2(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch in distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace sparsemesh
