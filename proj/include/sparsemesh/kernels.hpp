// Copyright 2026 The SparseMesh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense inner-loop kernels used by every solver.
//
// Each kernel has a portable scalar reference and an AVX2+FMA variant. The
// variant is chosen once per process from CPUID; SPARSEMESH_SIMD=scalar in the
// environment forces the reference path. The two paths agree to rounding
// (different summation order), so any comparison between them is tolerance
// based, while results within one process are bit-reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace sparsemesh::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
};

const KernelTable& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();
Isa active_isa();
std::string_view isa_name(Isa isa);
const KernelTable& active_kernels();

/// Forces a path for the rest of the process; kAvx2 falls back to scalar
/// when unsupported. Intended for tests and benchmarks.
void force_isa(Isa isa);

// Convenience wrappers over the active table.

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = A x for row-major A (rows x cols).
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);

/// y = A^T x for row-major A (rows x cols).
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

}  // namespace sparsemesh::simd
