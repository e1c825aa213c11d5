#pragma once

#define EIGEN_DONT_PARALLELIZE 1
#include <Eigen/Core>

#include <cstdint>

namespace earshot::nn {

// C = alpha * op(A) * op(B) + beta * C, row-major raw buffers.
// Eigen does the heavy lifting single-threaded; callers parallelize over
// independent chunks, which keeps results independent of the thread count.
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, int64_t lda, const T* b, int64_t ldb, T beta, T* c, int64_t ldc) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<const Mat, 0, Eigen::OuterStride<>>;
  using MapMut = Eigen::Map<Mat, 0, Eigen::OuterStride<>>;

  MapMut C(c, m, n, Eigen::OuterStride<>(ldc));
  auto apply = [&](const auto& prod) {
    if (beta == T(0)) {
      if (alpha == T(1)) C.noalias() = prod;
      else C.noalias() = alpha * prod;
    } else {
      if (beta != T(1)) C *= beta;
      if (alpha == T(1)) C.noalias() += prod;
      else C.noalias() += alpha * prod;
    }
  };

  if (!trans_a && !trans_b) {
    Map A(a, m, k, Eigen::OuterStride<>(lda)), B(b, k, n, Eigen::OuterStride<>(ldb));
    apply(A * B);
  } else if (trans_a && !trans_b) {
    Map A(a, k, m, Eigen::OuterStride<>(lda)), B(b, k, n, Eigen::OuterStride<>(ldb));
    apply(A.transpose() * B);
  } else if (!trans_a && trans_b) {
    Map A(a, m, k, Eigen::OuterStride<>(lda)), B(b, n, k, Eigen::OuterStride<>(ldb));
    apply(A * B.transpose());
  } else {
    Map A(a, k, m, Eigen::OuterStride<>(lda)), B(b, n, k, Eigen::OuterStride<>(ldb));
    apply(A.transpose() * B.transpose());
  }
}

}  // namespace earshot::nn
