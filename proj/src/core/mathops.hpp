#ifndef __MATHOPS_HPP__
#define __MATHOPS_HPP__

#include <Eigen/Dense>

#include "tensor.hpp"

namespace anic {

// C[M,N] (+)= alpha · opA(A) · opB(B), row-major buffers. beta must be 0 or 1.
template <class S>
void gemm(bool transA, bool transB, int64_t M, int64_t N, int64_t K, S alpha,
          const S* A, const S* B, S beta, S* C) {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using CMap = Eigen::Map<Mat>;
    using Map = Eigen::Map<const Mat>;
    CMap c(C, M, N);
    Map a(A, transA ? K : M, transA ? M : K);
    Map b(B, transB ? N : K, transB ? K : N);
    auto run = [&](const auto& prod) {
        if (beta == S(0)) c.noalias() = alpha * prod;
        else c.noalias() += alpha * prod;
    };
    if (!transA && !transB) run(a * b);
    else if (transA && !transB) run(a.transpose() * b);
    else if (!transA && transB) run(a * b.transpose());
    else run(a.transpose() * b.transpose());
}

// same, with explicit row strides so head slices of a packed [N, H·dh] buffer
// can be used in place
template <class S>
void gemm_ld(bool transA, bool transB, int64_t M, int64_t N, int64_t K, S alpha,
             const S* A, int64_t lda, const S* B, int64_t ldb, S beta, S* C, int64_t ldc) {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Stride = Eigen::OuterStride<>;
    Eigen::Map<Mat, 0, Stride> c(C, M, N, Stride(ldc));
    Eigen::Map<const Mat, 0, Stride> a(A, transA ? K : M, transA ? M : K, Stride(lda));
    Eigen::Map<const Mat, 0, Stride> b(B, transB ? N : K, transB ? K : N, Stride(ldb));
    auto run = [&](const auto& prod) {
        if (beta == S(0)) c.noalias() = alpha * prod;
        else c.noalias() += alpha * prod;
    };
    if (!transA && !transB) run(a * b);
    else if (transA && !transB) run(a.transpose() * b);
    else if (!transA && transB) run(a * b.transpose());
    else run(a.transpose() * b.transpose());
}

}  // namespace anic

#endif  // __MATHOPS_HPP__
