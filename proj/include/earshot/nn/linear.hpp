#pragma once

#include <cmath>
#include <string>

#include "earshot/core/threading.hpp"
#include "earshot/nn/gemm.hpp"
#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

// Affine map on the last dimension: [..., in] -> [..., out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int64_t in, int64_t out, bool bias = true)
      : name_(std::move(name)), in_(in), out_(out), has_bias_(bias) {
    w_.name = name_ + ".weight";
    w_.init_shape({out_, in_});
    if (has_bias_) {
      b_.name = name_ + ".bias";
      b_.init_shape({out_});
    }
  }

  void init(Rng& rng) {
    double std = std::sqrt(2.0 / static_cast<double>(in_ + out_));
    w_.value.randn(rng, std);
    if (has_bias_) b_.value.zero();
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&w_);
    if (has_bias_) out.push_back(&b_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x;
    const int64_t rows = x.numel() / in_;
    auto shape = x.shape();
    shape.back() = out_;
    Tensor<T> y(shape);
    const int64_t band = row_band(rows);
    const int64_t n_bands = (rows + band - 1) / band;
#pragma omp parallel for schedule(static)
    for (int64_t bidx = 0; bidx < n_bands; ++bidx) {
      const int64_t r0 = bidx * band, r1 = std::min(r0 + band, rows);
      gemm<T>(false, true, r1 - r0, out_, in_, T(1), x.data() + r0 * in_, in_, w_.value.data(),
              in_, T(0), y.data() + r0 * out_, out_);
      if (has_bias_) {
        for (int64_t r = r0; r < r1; ++r) {
          T* yp = y.data() + r * out_;
          for (int64_t o = 0; o < out_; ++o) yp[o] += b_.value[o];
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t rows = dy.numel() / out_;
    // Weight/bias grads in one serial GEMM: order-independent of workers.
    gemm<T>(true, false, out_, in_, rows, T(1), dy.data(), out_, x_.data(), in_, T(1),
            w_.grad.data(), in_);
    if (has_bias_) {
      for (int64_t r = 0; r < rows; ++r) {
        const T* dyp = dy.data() + r * out_;
        for (int64_t o = 0; o < out_; ++o) b_.grad[o] += dyp[o];
      }
    }
    Tensor<T> dx(x_.shape());
    const int64_t band = row_band(rows);
    const int64_t n_bands = (rows + band - 1) / band;
#pragma omp parallel for schedule(static)
    for (int64_t bidx = 0; bidx < n_bands; ++bidx) {
      const int64_t r0 = bidx * band, r1 = std::min(r0 + band, rows);
      gemm<T>(false, false, r1 - r0, in_, out_, T(1), dy.data() + r0 * out_, out_,
              w_.value.data(), in_, T(0), dx.data() + r0 * in_, in_);
    }
    return dx;
  }

  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }

 private:
  int64_t row_band(int64_t rows) const {
    int64_t per = (rows + 4 * num_workers() - 1) / (4 * num_workers());
    return std::max<int64_t>(16, per);
  }

  std::string name_;
  int64_t in_ = 0, out_ = 0;
  bool has_bias_ = true;
  Param<T> w_, b_;
  Tensor<T> x_;
};

}  // namespace earshot::nn
