#pragma once

#include <algorithm>
#include <vector>

#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

// Mean over the temporal axis of [N, C, T, H, W] -> [N, C, 1, H, W].
template <typename T>
class TemporalMeanPool {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    t_in_ = x.dim(2);
    const int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(3) * x.dim(4);
    Tensor<T> y({N, C, 1, x.dim(3), x.dim(4)});
#pragma omp parallel for schedule(static)
    for (int64_t nc = 0; nc < N * C; ++nc) {
      const T* xp = x.data() + nc * t_in_ * HW;
      T* yp = y.data() + nc * HW;
      for (int64_t i = 0; i < HW; ++i) {
        double acc = 0;
        for (int64_t t = 0; t < t_in_; ++t) acc += xp[t * HW + i];
        yp[i] = static_cast<T>(acc / static_cast<double>(t_in_));
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t N = dy.dim(0), C = dy.dim(1), HW = dy.dim(3) * dy.dim(4);
    Tensor<T> dx({N, C, t_in_, dy.dim(3), dy.dim(4)});
    const T inv = static_cast<T>(1.0 / static_cast<double>(t_in_));
#pragma omp parallel for schedule(static)
    for (int64_t nc = 0; nc < N * C; ++nc) {
      const T* dyp = dy.data() + nc * HW;
      T* dxp = dx.data() + nc * t_in_ * HW;
      for (int64_t t = 0; t < t_in_; ++t) {
        for (int64_t i = 0; i < HW; ++i) dxp[t * HW + i] = dyp[i] * inv;
      }
    }
    return dx;
  }

 private:
  int64_t t_in_ = 1;
};

// Grid <-> token reshaping for the transformer. Token k corresponds to
// spatial cell (k / W, k % W); channels become the token dimension.
template <typename T>
inline Tensor<T> grid_to_tokens(const Tensor<T>& x) {
  // [N, C, 1, H, W] -> [N, H*W, C]
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(3), W = x.dim(4);
  Tensor<T> y({N, H * W, C});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      const T* xp = x.data() + (n * C + c) * H * W;
      for (int64_t k = 0; k < H * W; ++k) y[(n * H * W + k) * C + c] = xp[k];
    }
  }
  return y;
}

template <typename T>
inline Tensor<T> tokens_to_grid(const Tensor<T>& x, int64_t H, int64_t W) {
  // [N, H*W, C] -> [N, C, 1, H, W]
  const int64_t N = x.dim(0), C = x.dim(2);
  Tensor<T> y({N, C, 1, H, W});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t c = 0; c < C; ++c) {
      T* yp = y.data() + (n * C + c) * H * W;
      for (int64_t k = 0; k < H * W; ++k) yp[k] = x[(n * H * W + k) * C + c];
    }
  }
  return y;
}

// Concatenate two [N, C?, T, H, W] tensors along channels.
template <typename T>
inline Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const int64_t N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1);
  const int64_t tail = a.dim(2) * a.dim(3) * a.dim(4);
  Tensor<T> y({N, Ca + Cb, a.dim(2), a.dim(3), a.dim(4)});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    std::copy(a.data() + n * Ca * tail, a.data() + (n + 1) * Ca * tail,
              y.data() + n * (Ca + Cb) * tail);
    std::copy(b.data() + n * Cb * tail, b.data() + (n + 1) * Cb * tail,
              y.data() + n * (Ca + Cb) * tail + Ca * tail);
  }
  return y;
}

// Concatenate token sequences [N, La, D] + [N, Lb, D] -> [N, La+Lb, D].
template <typename T>
inline Tensor<T> concat_tokens(const Tensor<T>& a, const Tensor<T>& b) {
  const int64_t N = a.dim(0), La = a.dim(1), Lb = b.dim(1), D = a.dim(2);
  Tensor<T> y({N, La + Lb, D});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    std::copy(a.data() + n * La * D, a.data() + (n + 1) * La * D, y.data() + n * (La + Lb) * D);
    std::copy(b.data() + n * Lb * D, b.data() + (n + 1) * Lb * D,
              y.data() + n * (La + Lb) * D + La * D);
  }
  return y;
}

template <typename T>
inline void split_tokens(const Tensor<T>& y, Tensor<T>& a, Tensor<T>& b, int64_t la) {
  const int64_t N = y.dim(0), L = y.dim(1), D = y.dim(2);
  a.resize({N, la, D});
  b.resize({N, L - la, D});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    std::copy(y.data() + n * L * D, y.data() + n * L * D + la * D, a.data() + n * la * D);
    std::copy(y.data() + n * L * D + la * D, y.data() + (n + 1) * L * D,
              b.data() + n * (L - la) * D);
  }
}

template <typename T>
inline void split_channels(const Tensor<T>& y, Tensor<T>& a, Tensor<T>& b, int64_t ca) {
  const int64_t N = y.dim(0), C = y.dim(1);
  const int64_t tail = y.dim(2) * y.dim(3) * y.dim(4);
  a.resize({N, ca, y.dim(2), y.dim(3), y.dim(4)});
  b.resize({N, C - ca, y.dim(2), y.dim(3), y.dim(4)});
#pragma omp parallel for schedule(static)
  for (int64_t n = 0; n < N; ++n) {
    std::copy(y.data() + n * C * tail, y.data() + n * C * tail + ca * tail,
              a.data() + n * ca * tail);
    std::copy(y.data() + n * C * tail + ca * tail, y.data() + (n + 1) * C * tail,
              b.data() + n * (C - ca) * tail);
  }
}

}  // namespace earshot::nn
