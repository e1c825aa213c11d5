#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

template <typename T>
class ReLU {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    mask_.assign(static_cast<size_t>(x.numel()), 0);
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) {
      if (x[i] > T(0)) {
        y[i] = x[i];
        mask_[static_cast<size_t>(i)] = 1;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < dy.numel(); ++i) {
      dx[i] = mask_[static_cast<size_t>(i)] ? dy[i] : T(0);
    }
    return dx;
  }

  void release_cache() { mask_.clear(); }

 private:
  std::vector<uint8_t> mask_;
};

// Exact GELU (erf form); keeps finite-difference checks well behaved.
template <typename T>
class Gelu {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x;
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) {
      double v = x[i];
      y[i] = static_cast<T>(0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)));
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape());
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < dy.numel(); ++i) {
      double v = x_[i];
      double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
      double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      dx[i] = static_cast<T>(dy[i] * (cdf + v * pdf));
    }
    return dx;
  }

 private:
  Tensor<T> x_;
};

}  // namespace earshot::nn
