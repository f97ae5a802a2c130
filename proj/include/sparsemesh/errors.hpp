// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsemesh {

/// Bad shapes, out-of-range parameters, inconsistent configurations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN or infinite values where finite reals are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The columns of A restricted to a support are numerically rank deficient.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, std::vector<std::size_t> support)
      : std::runtime_error(what), support_(std::move(support)) {}

  const std::vector<std::size_t>& support() const noexcept { return support_; }

 private:
  std::vector<std::size_t> support_;
};

class NotNonnegativeError : public std::runtime_error {
 public:
  NotNonnegativeError(const std::string& what, std::size_t row, std::size_t col)
      : std::runtime_error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class StochasticityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BalancingFailed : public std::runtime_error {
 public:
  BalancingFailed(const std::string& what, double deviation)
      : std::runtime_error(what), deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive RIC enumeration would exceed the support-count cap.
class RicTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constants fall outside the regime where the convergence guarantees apply.
class NoGuarantee : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparsemesh
