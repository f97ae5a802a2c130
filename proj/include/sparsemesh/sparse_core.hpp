// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Vector/matrix primitives shared by the solvers: top-k support selection,
// hard thresholding, least squares restricted to a support, and the gradient
// proxy support step.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sparsemesh {

using Vector = std::vector<double>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sorted, duplicate-free set of indices into [0, dim).
class SupportSet {
 public:
  SupportSet() = default;
  /// Sorts and validates `indices`; throws InvalidArgument on duplicates or
  /// out-of-range entries.
  SupportSet(std::vector<std::size_t> indices, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t i) const;
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// Indices in [0, dim) not in the set.
  SupportSet complement() const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t dim_ = 0;
};

/// Real vector in dense storage with support queries.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : values_(dim, 0.0) {}
  explicit SparseVector(Vector values) : values_(std::move(values)) {}
  SparseVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  std::span<const double> view() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Indices of exactly-nonzero entries.
  SupportSet support() const;
  std::size_t nnz() const;
  double norm() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  Vector values_;
};

/// Row-major real matrix with finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  /// Throws InvalidArgument on size mismatch, NumericError on non-finite data.
  DenseMatrix(std::size_t rows, std::size_t cols, Vector data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Eigen::Map<const RowMajorMatrix> as_eigen() const { return {data_.data(), Eigen::Index(rows_), Eigen::Index(cols_)}; }

  /// Copy of the columns listed in `support`, column-major for factorization.
  Eigen::MatrixXd columns(const SupportSet& support) const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// Relative pivot threshold below which a restricted system is singular.
inline constexpr double kRankTolerance = 1e-10;

/// Indices of the s largest-magnitude entries; equal magnitudes resolve to
/// the lower index.
SupportSet supp_top_k(std::span<const double> v, std::size_t s);

/// Best s-term approximation: v on supp_top_k(v, s), zero elsewhere.
SparseVector hard_threshold(std::span<const double> v, std::size_t s);

/// v restricted to `support`, zero elsewhere.
SparseVector restrict_to(std::span<const double> v, const SupportSet& support);

/// z with z_{T^c} = 0 and z_T = argmin ||y - A_T z_T||, via column-pivoted QR.
/// Throws SingularSystemError if A_T is rank deficient.
SparseVector least_squares_on_support(const DenseMatrix& a, std::span<const double> y,
                                      const SupportSet& support);

/// x_prev + A^T (y - A x_prev), the gradient proxy of the HTP support step.
Vector gradient_proxy(const DenseMatrix& a, std::span<const double> y,
                      std::span<const double> x_prev);

/// supp_top_k(gradient_proxy(a, y, x_prev), s).
SupportSet gradient_support_step(const DenseMatrix& a, std::span<const double> y,
                                 std::span<const double> x_prev, std::size_t s);

/// y - A x
Vector residual(const DenseMatrix& a, std::span<const double> y, std::span<const double> x);

double norm2(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace sparsemesh
