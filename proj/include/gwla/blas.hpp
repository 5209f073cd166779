#pragma once

#include <cblas.h>

#include <mutex>

extern "C" void openblas_set_num_threads(int);

namespace gwla {

/// Training runs its own worker threads; BLAS must not spawn more underneath
/// them, and single-threaded kernels keep reductions bit-reproducible.
inline void init_blas() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

// Row-major C = alpha * op(A) * op(B) + beta * C.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  init_blas();
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
                 int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  init_blas();
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

// y = alpha * op(A) * x + beta * y, A row-major m x n.
inline void gemv(bool trans, int m, int n, float alpha, const float* a, const float* x, float beta,
                 float* y) {
  init_blas();
  cblas_sgemv(CblasRowMajor, trans ? CblasTrans : CblasNoTrans, m, n, alpha, a, n, x, 1, beta, y, 1);
}

inline void gemv(bool trans, int m, int n, double alpha, const double* a, const double* x,
                 double beta, double* y) {
  init_blas();
  cblas_dgemv(CblasRowMajor, trans ? CblasTrans : CblasNoTrans, m, n, alpha, a, n, x, 1, beta, y, 1);
}

}  // namespace gwla
