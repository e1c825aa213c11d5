#pragma once

#include <vector>

#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

// Axis mapping for align-corners bilinear interpolation.
struct BilinearAxis {
  std::vector<int64_t> i0, i1;
  std::vector<float> w1;  // weight of i1; weight of i0 is 1-w1

  BilinearAxis() = default;
  BilinearAxis(int64_t src, int64_t dst) {
    i0.resize(dst);
    i1.resize(dst);
    w1.resize(dst);
    for (int64_t d = 0; d < dst; ++d) {
      double s = dst > 1 ? static_cast<double>(d) * (src - 1) / (dst - 1) : 0.0;
      int64_t lo = static_cast<int64_t>(s);
      if (lo > src - 2) lo = src > 1 ? src - 2 : 0;
      i0[d] = lo;
      i1[d] = src > 1 ? lo + 1 : 0;
      w1[d] = static_cast<float>(s - static_cast<double>(lo));
    }
  }
};

// Bilinear resize of the trailing two dims of [N, C, T, H, W].
template <typename T>
class BilinearResize {
 public:
  BilinearResize() = default;
  BilinearResize(int64_t dst_h, int64_t dst_w) : dh_(dst_h), dw_(dst_w) {}

  Tensor<T> forward(const Tensor<T>& x) {
    sh_ = x.dim(3);
    sw_ = x.dim(4);
    if (ay_.i0.size() != static_cast<size_t>(dh_)) ay_ = BilinearAxis(sh_, dh_);
    if (ax_.i0.size() != static_cast<size_t>(dw_)) ax_ = BilinearAxis(sw_, dw_);
    const int64_t planes = x.dim(0) * x.dim(1) * x.dim(2);
    Tensor<T> y({x.dim(0), x.dim(1), x.dim(2), dh_, dw_});
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < planes; ++p) {
      const T* src = x.data() + p * sh_ * sw_;
      T* dst = y.data() + p * dh_ * dw_;
      for (int64_t oy = 0; oy < dh_; ++oy) {
        const T* r0 = src + ay_.i0[oy] * sw_;
        const T* r1 = src + ay_.i1[oy] * sw_;
        const T fy = static_cast<T>(ay_.w1[oy]);
        for (int64_t ox = 0; ox < dw_; ++ox) {
          // a + f*(b-a) form is exact on constant inputs.
          const T fx = static_cast<T>(ax_.w1[ox]);
          const T top = r0[ax_.i0[ox]] + fx * (r0[ax_.i1[ox]] - r0[ax_.i0[ox]]);
          const T bot = r1[ax_.i0[ox]] + fx * (r1[ax_.i1[ox]] - r1[ax_.i0[ox]]);
          dst[oy * dw_ + ox] = top + fy * (bot - top);
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t planes = dy.dim(0) * dy.dim(1) * dy.dim(2);
    Tensor<T> dx({dy.dim(0), dy.dim(1), dy.dim(2), sh_, sw_});
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < planes; ++p) {
      const T* g = dy.data() + p * dh_ * dw_;
      T* dst = dx.data() + p * sh_ * sw_;
      for (int64_t oy = 0; oy < dh_; ++oy) {
        const T fy = static_cast<T>(ay_.w1[oy]);
        T* r0 = dst + ay_.i0[oy] * sw_;
        T* r1 = dst + ay_.i1[oy] * sw_;
        for (int64_t ox = 0; ox < dw_; ++ox) {
          const T fx = static_cast<T>(ax_.w1[ox]);
          const T v = g[oy * dw_ + ox];
          r0[ax_.i0[ox]] += v * (T(1) - fx) * (T(1) - fy);
          r0[ax_.i1[ox]] += v * fx * (T(1) - fy);
          r1[ax_.i0[ox]] += v * (T(1) - fx) * fy;
          r1[ax_.i1[ox]] += v * fx * fy;
        }
      }
    }
    return dx;
  }

 private:
  int64_t dh_ = 0, dw_ = 0, sh_ = 0, sw_ = 0;
  BilinearAxis ay_, ax_;
};

}  // namespace earshot::nn
