#include "f0reg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace f0reg::kernels {

namespace {

constexpr std::size_t kRowTile = 4;
constexpr std::size_t kColTile = 32;
constexpr std::size_t kRowBlock = 128;

void check_gemm(const Matrix& a, const Matrix& b, const Matrix& c) {
  require_shape(a.cols() == b.rows(), "gemm: inner dimensions differ (" +
                                          std::to_string(a.cols()) + " vs " +
                                          std::to_string(b.rows()) + ")");
  require_shape(c.rows() == a.rows() && c.cols() == b.cols(),
                "gemm: output has wrong shape");
}

// Full register tile: kRowTile rows by kColTile columns held in accumulators
// for the whole reduction.
inline void tile_full(const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc,
                      std::size_t k_len, bool accumulate) {
  double acc[kRowTile][kColTile];
  for (std::size_t r = 0; r < kRowTile; ++r)
    for (std::size_t j = 0; j < kColTile; ++j)
      acc[r][j] = accumulate ? c[r * ldc + j] : 0.0;

  for (std::size_t k = 0; k < k_len; ++k) {
    const double* brow = b + k * ldb;
    for (std::size_t r = 0; r < kRowTile; ++r) {
      const double ark = a[r * lda + k];
#pragma omp simd
      for (std::size_t j = 0; j < kColTile; ++j)
        acc[r][j] = std::fma(ark, brow[j], acc[r][j]);
    }
  }

  for (std::size_t r = 0; r < kRowTile; ++r)
    for (std::size_t j = 0; j < kColTile; ++j) c[r * ldc + j] = acc[r][j];
}

// Ragged edge tile, same accumulation order.
inline void tile_edge(const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc,
                      std::size_t m, std::size_t n, std::size_t k_len,
                      bool accumulate) {
  for (std::size_t r = 0; r < m; ++r) {
    double* crow = c + r * ldc;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    for (std::size_t k = 0; k < k_len; ++k) {
      const double ark = a[r * lda + k];
      const double* brow = b + k * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] = std::fma(ark, brow[j], crow[j]);
    }
  }
}

}  // namespace

void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  check_gemm(a, b, c);
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  const auto blocks = static_cast<std::ptrdiff_t>((m + kRowBlock - 1) / kRowBlock);

#pragma omp parallel
  {
    // Contiguous copy of one kColTile-wide column panel of B.
    std::vector<double> panel(k * kColTile);
#pragma omp for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
      const std::size_t i_begin = static_cast<std::size_t>(blk) * kRowBlock;
      const std::size_t i_end = std::min(m, i_begin + kRowBlock);
      for (std::size_t j0 = 0; j0 < n; j0 += kColTile) {
        const std::size_t nj = std::min(kColTile, n - j0);
        const double* tb = pb + j0;
        std::size_t ldb = n;
        if (nj == kColTile) {
          for (std::size_t kk = 0; kk < k; ++kk)
            std::copy_n(pb + kk * n + j0, kColTile, panel.data() + kk * kColTile);
          tb = panel.data();
          ldb = kColTile;
        }
        for (std::size_t i0 = i_begin; i0 < i_end; i0 += kRowTile) {
          const std::size_t mi = std::min(kRowTile, i_end - i0);
          const double* ta = pa + i0 * k;
          double* tc = pc + i0 * n + j0;
          if (mi == kRowTile && nj == kColTile)
            tile_full(ta, k, tb, ldb, tc, n, k, accumulate);
          else
            tile_edge(ta, k, tb, ldb, tc, n, mi, nj, k, accumulate);
        }
      }
    }
  }
}

void transpose(const Matrix& in, Matrix& out) {
  require_shape(out.rows() == in.cols() && out.cols() == in.rows(),
                "transpose: output has wrong shape");
  const std::size_t rows = in.rows(), cols = in.cols();
  constexpr std::size_t kBlock = 32;
  const auto blocks = static_cast<std::ptrdiff_t>((rows + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::size_t r0 = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) out(c, r) = in(r, c);
    }
  }
}

void column_sums(const Matrix& in, std::span<double> out) {
  require_shape(out.size() == in.cols(), "column_sums: output has wrong length");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t rows = in.rows(), cols = in.cols();
  const double* p = in.data();
  // Columns are independent; each column is summed top to bottom.
  constexpr std::size_t kBlock = 64;
  const auto blocks = static_cast<std::ptrdiff_t>((cols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::size_t c0 = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t c1 = std::min(cols, c0 + kBlock);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = c0; c < c1; ++c) out[c] += p[r * cols + c];
  }
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_thread_count([[maybe_unused]] int n) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, n));
#endif
}

namespace reference {

void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  check_gemm(a, b, c);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = accumulate ? c(i, j) : 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s = std::fma(a(i, k), b(k, j), s);
      c(i, j) = s;
    }
}

void transpose(const Matrix& in, Matrix& out) {
  require_shape(out.rows() == in.cols() && out.cols() == in.rows(),
                "transpose: output has wrong shape");
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t c = 0; c < in.cols(); ++c) out(c, r) = in(r, c);
}

void column_sums(const Matrix& in, std::span<double> out) {
  require_shape(out.size() == in.cols(), "column_sums: output has wrong length");
  for (std::size_t c = 0; c < in.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < in.rows(); ++r) s += in(r, c);
    out[c] = s;
  }
}

}  // namespace reference

}  // namespace f0reg::kernels
