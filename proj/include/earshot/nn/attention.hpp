#pragma once

#include <cmath>
#include <string>

#include "earshot/nn/gemm.hpp"
#include "earshot/nn/linear.hpp"
#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

// Multi-head self-attention on token sequences [N, L, D].
template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(std::string name, int64_t dim, int64_t heads)
      : name_(std::move(name)), d_(dim), h_(heads), dh_(dim / heads),
        qkv_(name_ + ".qkv", dim, 3 * dim), proj_(name_ + ".proj", dim, dim) {
    if (d_ % h_ != 0) throw std::invalid_argument(name_ + ": dim % heads != 0");
  }

  void init(Rng& rng) {
    qkv_.init(rng);
    proj_.init(rng);
  }

  void collect(ParamRefs<T>& out) {
    qkv_.collect(out);
    proj_.collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int64_t N = x.dim(0), L = x.dim(1);
    n_ = N;
    l_ = L;
    qkv_out_ = qkv_.forward(x);  // [N, L, 3D]
    attn_.resize({N, h_, L, L});
    Tensor<T> ctx({N, L, d_});
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t h = 0; h < h_; ++h) {
        compute_head(n, h, ctx);
      }
    }
    return proj_.forward(ctx);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t N = n_, L = l_;
    Tensor<T> dctx = proj_.backward(dy);  // [N, L, D]
    Tensor<T> dqkv({N, L, 3 * d_});
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t h = 0; h < h_; ++h) {
        backward_head(n, h, dctx, dqkv);
      }
    }
    return qkv_.backward(dqkv);
  }

 private:
  // Strided access into qkv_out_: token t of sample n holds [q | k | v].
  const T* q_ptr(int64_t n, int64_t l, int64_t h) const {
    return qkv_out_.data() + (n * l_ + l) * 3 * d_ + h * dh_;
  }
  const T* k_ptr(int64_t n, int64_t l, int64_t h) const {
    return qkv_out_.data() + (n * l_ + l) * 3 * d_ + d_ + h * dh_;
  }
  const T* v_ptr(int64_t n, int64_t l, int64_t h) const {
    return qkv_out_.data() + (n * l_ + l) * 3 * d_ + 2 * d_ + h * dh_;
  }

  void compute_head(int64_t n, int64_t h, Tensor<T>& ctx) {
    const int64_t L = l_;
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh_)));
    T* s = attn_.data() + (n * h_ + h) * L * L;
    // scores = Q K^T * scale
    gemm<T>(false, true, L, L, dh_, scale, q_ptr(n, 0, h), 3 * d_, k_ptr(n, 0, h), 3 * d_, T(0),
            s, L);
    for (int64_t i = 0; i < L; ++i) {
      T* row = s + i * L;
      T mx = row[0];
      for (int64_t j = 1; j < L; ++j) mx = std::max(mx, row[j]);
      double sum = 0;
      for (int64_t j = 0; j < L; ++j) {
        double e = std::exp(static_cast<double>(row[j] - mx));
        row[j] = static_cast<T>(e);
        sum += e;
      }
      const T inv = static_cast<T>(1.0 / sum);
      for (int64_t j = 0; j < L; ++j) row[j] *= inv;
    }
    // ctx = attn V
    gemm<T>(false, false, L, dh_, L, T(1), s, L, v_ptr(n, 0, h), 3 * d_, T(0),
            ctx.data() + n * L * d_ + h * dh_, d_);
  }

  void backward_head(int64_t n, int64_t h, const Tensor<T>& dctx, Tensor<T>& dqkv) {
    const int64_t L = l_;
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh_)));
    const T* s = attn_.data() + (n * h_ + h) * L * L;
    const T* dctx_p = dctx.data() + n * L * d_ + h * dh_;
    std::vector<T> ds(static_cast<size_t>(L * L));
    // dV = S^T dctx
    gemm<T>(true, false, L, dh_, L, T(1), s, L, dctx_p, d_, T(0),
            dqkv.data() + n * L * 3 * d_ + 2 * d_ + h * dh_, 3 * d_);
    // dS = dctx V^T
    gemm<T>(false, true, L, L, dh_, T(1), dctx_p, d_, v_ptr(n, 0, h), 3 * d_, T(0), ds.data(), L);
    // Softmax backward, rowwise.
    for (int64_t i = 0; i < L; ++i) {
      const T* srow = s + i * L;
      T* drow = ds.data() + i * L;
      double dot = 0;
      for (int64_t j = 0; j < L; ++j) dot += static_cast<double>(drow[j]) * srow[j];
      for (int64_t j = 0; j < L; ++j) {
        drow[j] = static_cast<T>(srow[j] * (drow[j] - static_cast<T>(dot)));
      }
    }
    // dQ = dS_pre K * scale ; dK = dS_pre^T Q * scale
    gemm<T>(false, false, L, dh_, L, scale, ds.data(), L, k_ptr(n, 0, h), 3 * d_, T(0),
            dqkv.data() + n * L * 3 * d_ + h * dh_, 3 * d_);
    gemm<T>(true, false, L, dh_, L, scale, ds.data(), L, q_ptr(n, 0, h), 3 * d_, T(0),
            dqkv.data() + n * L * 3 * d_ + d_ + h * dh_, 3 * d_);
  }

  std::string name_;
  int64_t d_ = 0, h_ = 1, dh_ = 0, n_ = 0, l_ = 0;
  Linear<T> qkv_, proj_;
  Tensor<T> qkv_out_;  // [N, L, 3D]
  Tensor<T> attn_;     // post-softmax attention, [N, H, L, L]
};

}  // namespace earshot::nn
