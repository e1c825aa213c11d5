#pragma once

#include <array>
#include <cmath>
#include <string>

#include "earshot/nn/gemm.hpp"
#include "earshot/nn/scratch.hpp"
#include "earshot/nn/tensor.hpp"
#include "earshot/core/threading.hpp"

namespace earshot::nn {

inline int64_t conv_out_dim(int64_t in, int k, int s, int p) {
  return (in + 2 * p - k) / s + 1;
}

// 3D convolution over [N, C, T, H, W], im2col + GEMM. Work is split into a
// fixed chunk grid (n, t_out, output-row band); the grid depends only on
// shapes, so results are reproducible for any worker count.
//
// replicate_t switches the temporal axis from zero padding to edge
// replication, which makes the layer exactly equivariant to constant-in-time
// inputs (the encoders rely on this so temporal pooling of static content is
// the identity).
template <typename T>
class Conv3d {
 public:
  Conv3d() = default;
  Conv3d(std::string name, int64_t cin, int64_t cout, std::array<int, 3> kernel,
         std::array<int, 3> stride, std::array<int, 3> pad, bool bias = true,
         bool replicate_t = false)
      : name_(std::move(name)), cin_(cin), cout_(cout), k_(kernel), s_(stride), p_(pad),
        has_bias_(bias), replicate_t_(replicate_t) {
    kk_ = cin_ * k_[0] * k_[1] * k_[2];
    w_.name = name_ + ".weight";
    w_.init_shape({cout_, kk_});
    if (has_bias_) {
      b_.name = name_ + ".bias";
      b_.init_shape({cout_});
    }
  }

  void init(Rng& rng) {
    double std = std::sqrt(2.0 / static_cast<double>(kk_));
    w_.value.randn(rng, std);
    if (has_bias_) b_.value.zero();
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&w_);
    if (has_bias_) out.push_back(&b_);
  }

  int64_t out_channels() const { return cout_; }

  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x;
    const auto& sh = x.shape();
    const int64_t N = sh[0], Ti = sh[2], Hi = sh[3], Wi = sh[4];
    if (sh[1] != cin_) throw std::invalid_argument(name_ + ": channel mismatch " + x.shape_str());
    const int64_t To = conv_out_dim(Ti, k_[0], s_[0], p_[0]);
    const int64_t Ho = conv_out_dim(Hi, k_[1], s_[1], p_[1]);
    const int64_t Wo = conv_out_dim(Wi, k_[2], s_[2], p_[2]);
    if (To < 1 || Ho < 1 || Wo < 1) throw std::invalid_argument(name_ + ": input too small");
    Tensor<T> y({N, cout_, To, Ho, Wo});

    const int64_t rows_per = row_band(Ho, Wo);
    const int64_t n_bands = (Ho + rows_per - 1) / rows_per;
    const int64_t n_chunks = N * To * n_bands;
    const int64_t sy_c = To * Ho * Wo;

#pragma omp parallel for schedule(static)
    for (int64_t chunk = 0; chunk < n_chunks; ++chunk) {
      const int64_t n = chunk / (To * n_bands);
      const int64_t t = (chunk / n_bands) % To;
      const int64_t oh0 = (chunk % n_bands) * rows_per;
      const int64_t oh1 = std::min(oh0 + rows_per, Ho);
      const int64_t cols = (oh1 - oh0) * Wo;
      T* col = thread_scratch<T>(static_cast<size_t>(kk_ * cols)).data();
      im2col(x, n, t, oh0, oh1, Wo, col);
      T* yp = y.data() + ((n * cout_) * To + t) * Ho * Wo + oh0 * Wo;
      gemm<T>(false, false, cout_, cols, kk_, T(1), w_.value.data(), kk_, col, cols, T(0), yp, sy_c);
      if (has_bias_) {
        for (int64_t co = 0; co < cout_; ++co) {
          T bv = b_.value[co];
          T* row = yp + co * sy_c;
          for (int64_t c = 0; c < cols; ++c) row[c] += bv;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const auto& sh = x_.shape();
    const int64_t N = sh[0], Ti = sh[2], Hi = sh[3], Wi = sh[4];
    const int64_t To = dy.dim(2), Ho = dy.dim(3), Wo = dy.dim(4);
    const int64_t sy_c = To * Ho * Wo;
    const int64_t rows_per = row_band(Ho, Wo);
    const int64_t n_bands = (Ho + rows_per - 1) / rows_per;

    // Bias gradient.
    if (has_bias_) {
#pragma omp parallel for schedule(static)
      for (int64_t co = 0; co < cout_; ++co) {
        T acc = 0;
        for (int64_t n = 0; n < N; ++n) {
          const T* p = dy.data() + (n * cout_ + co) * sy_c;
          for (int64_t i = 0; i < sy_c; ++i) acc += p[i];
        }
        b_.grad[co] += acc;
      }
    }

    // Weight gradient: per-worker partial accumulators reduced in fixed order.
    {
      const int workers = num_workers();
      std::vector<Tensor<T>> partial(static_cast<size_t>(workers));
      for (auto& t : partial) t.resize({cout_, kk_});
      const int64_t n_chunks = N * To * n_bands;
#pragma omp parallel for schedule(static)
      for (int64_t chunk = 0; chunk < n_chunks; ++chunk) {
        int wi = worker_index();
        const int64_t n = chunk / (To * n_bands);
        const int64_t t = (chunk / n_bands) % To;
        const int64_t oh0 = (chunk % n_bands) * rows_per;
        const int64_t oh1 = std::min(oh0 + rows_per, Ho);
        const int64_t cols = (oh1 - oh0) * Wo;
        T* col = thread_scratch<T>(static_cast<size_t>(kk_ * cols)).data();
        im2col(x_, n, t, oh0, oh1, Wo, col);
        const T* dyp = dy.data() + ((n * cout_) * To + t) * Ho * Wo + oh0 * Wo;
        gemm<T>(false, true, cout_, kk_, cols, T(1), dyp, sy_c, col, cols, T(1),
                partial[static_cast<size_t>(wi)].data(), kk_);
      }
      for (const auto& pt : partial) {
        for (int64_t i = 0; i < pt.numel(); ++i) w_.grad[i] += pt[i];
      }
    }

    // Data gradient: col2im scatters overlap across chunks of the same
    // sample, so parallelize over samples only.
    Tensor<T> dx(x_.shape());
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t t = 0; t < To; ++t) {
        for (int64_t band = 0; band < n_bands; ++band) {
          const int64_t oh0 = band * rows_per;
          const int64_t oh1 = std::min(oh0 + rows_per, Ho);
          const int64_t cols = (oh1 - oh0) * Wo;
          T* dcol = thread_scratch<T>(static_cast<size_t>(kk_ * cols)).data();
          const T* dyp = dy.data() + ((n * cout_) * To + t) * Ho * Wo + oh0 * Wo;
          gemm<T>(true, false, kk_, cols, cout_, T(1), w_.value.data(), kk_, dyp, sy_c, T(0),
                  dcol, cols);
          col2im_add(dx, n, t, oh0, oh1, Wo, dcol, Ti, Hi, Wi);
        }
      }
    }
    return dx;
  }

  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  void release_cache() { x_ = Tensor<T>(); }

 private:
  int64_t row_band(int64_t Ho, int64_t Wo) const {
    // Cap the im2col buffer around 4 MB per worker.
    int64_t budget = (4 << 20) / static_cast<int64_t>(sizeof(T));
    int64_t rows = budget / std::max<int64_t>(1, kk_ * Wo);
    return std::max<int64_t>(1, std::min(rows, Ho));
  }

  void im2col(const Tensor<T>& x, int64_t n, int64_t t, int64_t oh0, int64_t oh1,
              int64_t Wo, T* col) const {
    const int64_t Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
    const int64_t cols = (oh1 - oh0) * Wo;
    const int64_t sx_c = Ti * Hi * Wi;
    const T* xb = x.data() + n * cin_ * sx_c;
    for (int64_t ci = 0; ci < cin_; ++ci) {
      for (int kt = 0; kt < k_[0]; ++kt) {
        int64_t it = t * s_[0] + kt - p_[0];
        if (replicate_t_) it = std::clamp<int64_t>(it, 0, Ti - 1);
        const bool t_ok = it >= 0 && it < Ti;
        for (int kh = 0; kh < k_[1]; ++kh) {
          const int64_t rbase = ((ci * k_[0] + kt) * k_[1] + kh) * k_[2];
          for (int64_t oh = oh0; oh < oh1; ++oh) {
            const int64_t ih = oh * s_[1] + kh - p_[1];
            const int64_t cbase = (oh - oh0) * Wo;
            if (!t_ok || ih < 0 || ih >= Hi) {
              for (int kw = 0; kw < k_[2]; ++kw) {
                T* dst = col + (rbase + kw) * cols + cbase;
                std::fill(dst, dst + Wo, T(0));
              }
              continue;
            }
            const T* xp = xb + ci * sx_c + it * Hi * Wi + ih * Wi;
            for (int kw = 0; kw < k_[2]; ++kw) {
              T* dst = col + (rbase + kw) * cols + cbase;
              // Valid output column range for this tap.
              int64_t lo = 0, hi = Wo;
              const int64_t off = kw - p_[2];
              if (off < 0) lo = (-off + s_[2] - 1) / s_[2];
              const int64_t max_iw = Wi - 1 - off;
              if (max_iw < 0)
                hi = 0;
              else
                hi = std::min<int64_t>(Wo, max_iw / s_[2] + 1);
              for (int64_t ow = 0; ow < std::min(lo, Wo); ++ow) dst[ow] = T(0);
              if (s_[2] == 1) {
                for (int64_t ow = lo; ow < hi; ++ow) dst[ow] = xp[ow + off];
              } else {
                for (int64_t ow = lo; ow < hi; ++ow) dst[ow] = xp[ow * s_[2] + off];
              }
              for (int64_t ow = std::max(hi, lo); ow < Wo; ++ow) dst[ow] = T(0);
            }
          }
        }
      }
    }
  }

  void col2im_add(Tensor<T>& dx, int64_t n, int64_t t, int64_t oh0, int64_t oh1,
                  int64_t Wo, const T* col, int64_t Ti, int64_t Hi, int64_t Wi) const {
    const int64_t cols = (oh1 - oh0) * Wo;
    const int64_t sx_c = Ti * Hi * Wi;
    T* xb = dx.data() + n * cin_ * sx_c;
    for (int64_t ci = 0; ci < cin_; ++ci) {
      for (int kt = 0; kt < k_[0]; ++kt) {
        int64_t it = t * s_[0] + kt - p_[0];
        if (replicate_t_) it = std::clamp<int64_t>(it, 0, Ti - 1);
        if (it < 0 || it >= Ti) continue;
        for (int kh = 0; kh < k_[1]; ++kh) {
          const int64_t rbase = ((ci * k_[0] + kt) * k_[1] + kh) * k_[2];
          for (int64_t oh = oh0; oh < oh1; ++oh) {
            const int64_t ih = oh * s_[1] + kh - p_[1];
            if (ih < 0 || ih >= Hi) continue;
            T* xp = xb + ci * sx_c + it * Hi * Wi + ih * Wi;
            const int64_t cbase = (oh - oh0) * Wo;
            for (int kw = 0; kw < k_[2]; ++kw) {
              const T* src = col + (rbase + kw) * cols + cbase;
              const int64_t off = kw - p_[2];
              int64_t lo = 0, hi = Wo;
              if (off < 0) lo = (-off + s_[2] - 1) / s_[2];
              const int64_t max_iw = Wi - 1 - off;
              if (max_iw < 0)
                hi = 0;
              else
                hi = std::min<int64_t>(Wo, max_iw / s_[2] + 1);
              for (int64_t ow = lo; ow < hi; ++ow) xp[ow * s_[2] + off] += src[ow];
            }
          }
        }
      }
    }
  }

  std::string name_;
  int64_t cin_ = 0, cout_ = 0, kk_ = 0;
  std::array<int, 3> k_{}, s_{}, p_{};
  bool has_bias_ = true;
  bool replicate_t_ = false;
  Param<T> w_, b_;
  Tensor<T> x_;
};

}  // namespace earshot::nn
