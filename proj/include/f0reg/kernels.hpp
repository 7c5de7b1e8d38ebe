#pragma once

// Dense linear-algebra kernels used by the network.
//
// Every kernel accumulates each output element in a fixed order (increasing
// reduction index, starting from 0 or from the existing value), using fused
// multiply-add. Results therefore do not depend on the number of OpenMP
// threads, on tiling, or on which implementation (parallel or reference) ran.

#include <cstddef>

#include "f0reg/matrix.hpp"

namespace f0reg::kernels {

/// C = A * B, or C += A * B when `accumulate` is set.
/// A is M x K, B is K x N, C is M x N.
void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

/// out = transpose(in)
void transpose(const Matrix& in, Matrix& out);

/// out[j] = sum_i in(i, j), rows visited in increasing order.
void column_sums(const Matrix& in, std::span<double> out);

/// Number of threads the parallel kernels will use.
int thread_count();
void set_thread_count(int n);

namespace reference {

// Straightforward serial loops with the same accumulation order as the
// parallel kernels. Kept for testing and benchmarking only.
void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
void transpose(const Matrix& in, Matrix& out);
void column_sums(const Matrix& in, std::span<double> out);

}  // namespace reference

}  // namespace f0reg::kernels
