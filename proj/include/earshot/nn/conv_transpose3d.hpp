#pragma once

#include <array>
#include <cmath>
#include <string>

#include "earshot/core/threading.hpp"
#include "earshot/nn/gemm.hpp"
#include "earshot/nn/scratch.hpp"
#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

inline int64_t tconv_out_dim(int64_t in, int k, int s, int p) {
  return (in - 1) * s - 2 * p + k;
}

// Transposed 3D convolution over [N, C, T, H, W]. Forward scatters
// (col2im of W^T x), so the forward loop parallelizes over samples; the
// data gradient is an ordinary gather and chunks like Conv3d::forward.
template <typename T>
class ConvTranspose3d {
 public:
  ConvTranspose3d() = default;
  ConvTranspose3d(std::string name, int64_t cin, int64_t cout, std::array<int, 3> kernel,
                  std::array<int, 3> stride, std::array<int, 3> pad, bool bias = true)
      : name_(std::move(name)), cin_(cin), cout_(cout), k_(kernel), s_(stride), p_(pad),
        has_bias_(bias) {
    kk_ = cout_ * k_[0] * k_[1] * k_[2];
    w_.name = name_ + ".weight";
    w_.init_shape({cin_, kk_});
    if (has_bias_) {
      b_.name = name_ + ".bias";
      b_.init_shape({cout_});
    }
  }

  void init(Rng& rng) {
    double std = std::sqrt(2.0 / static_cast<double>(cin_ * k_[0] * k_[1] * k_[2]));
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
    const int64_t N = x.dim(0), Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
    if (x.dim(1) != cin_) throw std::invalid_argument(name_ + ": channel mismatch");
    const int64_t To = tconv_out_dim(Ti, k_[0], s_[0], p_[0]);
    const int64_t Ho = tconv_out_dim(Hi, k_[1], s_[1], p_[1]);
    const int64_t Wo = tconv_out_dim(Wi, k_[2], s_[2], p_[2]);
    Tensor<T> y({N, cout_, To, Ho, Wo});
    const int64_t rows_per = row_band(Wi);
    const int64_t n_bands = (Hi + rows_per - 1) / rows_per;
    const int64_t sx_c = Ti * Hi * Wi;

#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < N; ++n) {
      if (has_bias_) {
        T* yb = y.data() + n * cout_ * To * Ho * Wo;
        for (int64_t co = 0; co < cout_; ++co) {
          T bv = b_.value[co];
          T* p = yb + co * To * Ho * Wo;
          for (int64_t i = 0; i < To * Ho * Wo; ++i) p[i] = bv;
        }
      }
      for (int64_t t = 0; t < Ti; ++t) {
        for (int64_t band = 0; band < n_bands; ++band) {
          const int64_t ih0 = band * rows_per;
          const int64_t ih1 = std::min(ih0 + rows_per, Hi);
          const int64_t cols = (ih1 - ih0) * Wi;
          T* col = thread_scratch<T>(static_cast<size_t>(kk_ * cols)).data();
          const T* xp = x.data() + n * cin_ * sx_c + t * Hi * Wi + ih0 * Wi;
          // col = W^T x_chunk : [kk, cols]
          gemm<T>(true, false, kk_, cols, cin_, T(1), w_.value.data(), kk_, xp, sx_c, T(0), col,
                  cols);
          scatter_add(y, n, t, ih0, ih1, Wi, col, To, Ho, Wo);
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t N = x_.dim(0), Ti = x_.dim(2), Hi = x_.dim(3), Wi = x_.dim(4);
    const int64_t To = dy.dim(2), Ho = dy.dim(3), Wo = dy.dim(4);
    const int64_t sy_c = To * Ho * Wo;
    const int64_t sx_c = Ti * Hi * Wi;
    const int64_t rows_per = row_band(Wi);
    const int64_t n_bands = (Hi + rows_per - 1) / rows_per;
    const int64_t n_chunks = N * Ti * n_bands;

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

    Tensor<T> dx(x_.shape());
    {
      const int workers = num_workers();
      std::vector<Tensor<T>> partial(static_cast<size_t>(workers));
      for (auto& t : partial) t.resize({cin_, kk_});
#pragma omp parallel for schedule(static)
      for (int64_t chunk = 0; chunk < n_chunks; ++chunk) {
        const int wi = worker_index();
        const int64_t n = chunk / (Ti * n_bands);
        const int64_t t = (chunk / n_bands) % Ti;
        const int64_t ih0 = (chunk % n_bands) * rows_per;
        const int64_t ih1 = std::min(ih0 + rows_per, Hi);
        const int64_t cols = (ih1 - ih0) * Wi;
        T* dcol = thread_scratch<T>(static_cast<size_t>(kk_ * cols)).data();
        gather(dy, n, t, ih0, ih1, Wi, dcol, To, Ho, Wo);
        // dx_chunk = W dcol
        T* dxp = dx.data() + n * cin_ * sx_c + t * Hi * Wi + ih0 * Wi;
        gemm<T>(false, false, cin_, cols, kk_, T(1), w_.value.data(), kk_, dcol, cols, T(0), dxp,
                sx_c);
        // dW += x_chunk dcol^T
        const T* xp = x_.data() + n * cin_ * sx_c + t * Hi * Wi + ih0 * Wi;
        gemm<T>(false, true, cin_, kk_, cols, T(1), xp, sx_c, dcol, cols, T(1),
                partial[static_cast<size_t>(wi)].data(), kk_);
      }
      for (const auto& pt : partial) {
        for (int64_t i = 0; i < pt.numel(); ++i) w_.grad[i] += pt[i];
      }
    }
    return dx;
  }

  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  void release_cache() { x_ = Tensor<T>(); }

 private:
  int64_t row_band(int64_t Wi) const {
    int64_t budget = (4 << 20) / static_cast<int64_t>(sizeof(T));
    int64_t rows = budget / std::max<int64_t>(1, kk_ * Wi);
    return std::max<int64_t>(1, rows);
  }

  // y[n, co, t*s+kt-p, ih*s+kh-p, iw*s+kw-p] += col[(co,kt,kh,kw), (ih,iw)]
  void scatter_add(Tensor<T>& y, int64_t n, int64_t t, int64_t ih0, int64_t ih1, int64_t Wi,
                   const T* col, int64_t To, int64_t Ho, int64_t Wo) const {
    const int64_t cols = (ih1 - ih0) * Wi;
    T* yb = y.data() + n * cout_ * To * Ho * Wo;
    for (int64_t co = 0; co < cout_; ++co) {
      for (int kt = 0; kt < k_[0]; ++kt) {
        const int64_t ot = t * s_[0] + kt - p_[0];
        if (ot < 0 || ot >= To) continue;
        for (int kh = 0; kh < k_[1]; ++kh) {
          const int64_t rbase = ((co * k_[0] + kt) * k_[1] + kh) * k_[2];
          for (int64_t ih = ih0; ih < ih1; ++ih) {
            const int64_t oh = ih * s_[1] + kh - p_[1];
            if (oh < 0 || oh >= Ho) continue;
            T* yp = yb + co * To * Ho * Wo + ot * Ho * Wo + oh * Wo;
            const int64_t cbase = (ih - ih0) * Wi;
            for (int kw = 0; kw < k_[2]; ++kw) {
              const int64_t off = kw - p_[2];
              int64_t lo = 0, hi = Wi;
              if (off < 0) lo = (-off + s_[2] - 1) / s_[2];
              const int64_t max_ow = Wo - 1 - off;
              if (max_ow < 0)
                hi = 0;
              else
                hi = std::min<int64_t>(Wi, max_ow / s_[2] + 1);
              const T* src = col + (rbase + kw) * cols + cbase;
              for (int64_t iw = lo; iw < hi; ++iw) yp[iw * s_[2] + off] += src[iw];
            }
          }
        }
      }
    }
  }

  // dcol[(co,kt,kh,kw), (ih,iw)] = dy[n, co, t*s+kt-p, ih*s+kh-p, iw*s+kw-p]
  void gather(const Tensor<T>& dy, int64_t n, int64_t t, int64_t ih0, int64_t ih1, int64_t Wi,
              T* dcol, int64_t To, int64_t Ho, int64_t Wo) const {
    const int64_t cols = (ih1 - ih0) * Wi;
    const T* yb = dy.data() + n * cout_ * To * Ho * Wo;
    for (int64_t co = 0; co < cout_; ++co) {
      for (int kt = 0; kt < k_[0]; ++kt) {
        const int64_t ot = t * s_[0] + kt - p_[0];
        const bool t_ok = ot >= 0 && ot < To;
        for (int kh = 0; kh < k_[1]; ++kh) {
          const int64_t rbase = ((co * k_[0] + kt) * k_[1] + kh) * k_[2];
          for (int64_t ih = ih0; ih < ih1; ++ih) {
            const int64_t oh = ih * s_[1] + kh - p_[1];
            const int64_t cbase = (ih - ih0) * Wi;
            if (!t_ok || oh < 0 || oh >= Ho) {
              for (int kw = 0; kw < k_[2]; ++kw) {
                T* dst = dcol + (rbase + kw) * cols + cbase;
                std::fill(dst, dst + Wi, T(0));
              }
              continue;
            }
            const T* yp = yb + co * To * Ho * Wo + ot * Ho * Wo + oh * Wo;
            for (int kw = 0; kw < k_[2]; ++kw) {
              const int64_t off = kw - p_[2];
              int64_t lo = 0, hi = Wi;
              if (off < 0) lo = (-off + s_[2] - 1) / s_[2];
              const int64_t max_ow = Wo - 1 - off;
              if (max_ow < 0)
                hi = 0;
              else
                hi = std::min<int64_t>(Wi, max_ow / s_[2] + 1);
              T* dst = dcol + (rbase + kw) * cols + cbase;
              for (int64_t iw = 0; iw < std::min(lo, Wi); ++iw) dst[iw] = T(0);
              for (int64_t iw = lo; iw < hi; ++iw) dst[iw] = yp[iw * s_[2] + off];
              for (int64_t iw = std::max(hi, lo); iw < Wi; ++iw) dst[iw] = T(0);
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
  Param<T> w_, b_;
  Tensor<T> x_;
};

}  // namespace earshot::nn
