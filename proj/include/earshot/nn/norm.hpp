#pragma once

#include <cmath>
#include <string>

#include "earshot/core/threading.hpp"
#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

// GroupNorm over [N, C, T, H, W]. Statistics are per (sample, group), so
// train and eval behave identically and results don't depend on batch
// composition.
template <typename T>
class GroupNorm {
 public:
  GroupNorm() = default;
  GroupNorm(std::string name, int64_t channels, int64_t groups, double eps = 1e-5)
      : name_(std::move(name)), c_(channels), g_(groups), eps_(eps) {
    if (c_ % g_ != 0) throw std::invalid_argument(name_ + ": channels % groups != 0");
    gamma_.name = name_ + ".gamma";
    gamma_.init_shape({c_});
    beta_.name = name_ + ".beta";
    beta_.init_shape({c_});
    for (int64_t i = 0; i < c_; ++i) gamma_.value[i] = T(1);
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int64_t N = x.dim(0), spatial = x.numel() / (x.dim(0) * c_);
    const int64_t cpg = c_ / g_;
    const int64_t m = cpg * spatial;
    xhat_.resize(x.shape());
    inv_std_.resize({N, g_});
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t g = 0; g < g_; ++g) {
        const T* xp = x.data() + (n * c_ + g * cpg) * spatial;
        double mean = 0;
        for (int64_t i = 0; i < m; ++i) mean += xp[i];
        mean /= static_cast<double>(m);
        double var = 0;
        for (int64_t i = 0; i < m; ++i) {
          double d = xp[i] - mean;
          var += d * d;
        }
        var /= static_cast<double>(m);
        const T istd = static_cast<T>(1.0 / std::sqrt(var + eps_));
        inv_std_[n * g_ + g] = istd;
        T* xh = xhat_.data() + (n * c_ + g * cpg) * spatial;
        T* yp = y.data() + (n * c_ + g * cpg) * spatial;
        for (int64_t c = 0; c < cpg; ++c) {
          const T ga = gamma_.value[g * cpg + c], be = beta_.value[g * cpg + c];
          for (int64_t i = 0; i < spatial; ++i) {
            T v = static_cast<T>((xp[c * spatial + i] - mean) * istd);
            xh[c * spatial + i] = v;
            yp[c * spatial + i] = ga * v + be;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t N = dy.dim(0), spatial = dy.numel() / (dy.dim(0) * c_);
    const int64_t cpg = c_ / g_;
    const int64_t m = cpg * spatial;
    Tensor<T> dx(dy.shape());

    // Parameter grads, reduced serially per channel for determinism.
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < c_; ++c) {
      double dg = 0, db = 0;
      for (int64_t n = 0; n < N; ++n) {
        const T* dyp = dy.data() + (n * c_ + c) * spatial;
        const T* xh = xhat_.data() + (n * c_ + c) * spatial;
        for (int64_t i = 0; i < spatial; ++i) {
          dg += dyp[i] * xh[i];
          db += dyp[i];
        }
      }
      gamma_.grad[c] += static_cast<T>(dg);
      beta_.grad[c] += static_cast<T>(db);
    }

#pragma omp parallel for schedule(static) collapse(2)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t g = 0; g < g_; ++g) {
        const T* dyp = dy.data() + (n * c_ + g * cpg) * spatial;
        const T* xh = xhat_.data() + (n * c_ + g * cpg) * spatial;
        T* dxp = dx.data() + (n * c_ + g * cpg) * spatial;
        const double istd = inv_std_[n * g_ + g];
        double sum_dxhat = 0, sum_dxhat_xhat = 0;
        for (int64_t c = 0; c < cpg; ++c) {
          const double ga = gamma_.value[g * cpg + c];
          for (int64_t i = 0; i < spatial; ++i) {
            double dxh = dyp[c * spatial + i] * ga;
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xh[c * spatial + i];
          }
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        for (int64_t c = 0; c < cpg; ++c) {
          const double ga = gamma_.value[g * cpg + c];
          for (int64_t i = 0; i < spatial; ++i) {
            double dxh = dyp[c * spatial + i] * ga;
            dxp[c * spatial + i] = static_cast<T>(
                istd * (dxh - inv_m * sum_dxhat - xh[c * spatial + i] * inv_m * sum_dxhat_xhat));
          }
        }
      }
    }
    return dx;
  }

  void release_cache() {
    xhat_ = Tensor<T>();
    inv_std_ = Tensor<T>();
  }

 private:
  std::string name_;
  int64_t c_ = 0, g_ = 1;
  double eps_ = 1e-5;
  Param<T> gamma_, beta_;
  Tensor<T> xhat_, inv_std_;
};

// LayerNorm over the last dimension of [R..., D].
template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(std::string name, int64_t dim, double eps = 1e-5)
      : name_(std::move(name)), d_(dim), eps_(eps) {
    gamma_.name = name_ + ".gamma";
    gamma_.init_shape({d_});
    beta_.name = name_ + ".beta";
    beta_.init_shape({d_});
    for (int64_t i = 0; i < d_; ++i) gamma_.value[i] = T(1);
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int64_t rows = x.numel() / d_;
    xhat_.resize(x.shape());
    inv_std_.resize({rows});
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
      const T* xp = x.data() + r * d_;
      double mean = 0;
      for (int64_t i = 0; i < d_; ++i) mean += xp[i];
      mean /= static_cast<double>(d_);
      double var = 0;
      for (int64_t i = 0; i < d_; ++i) {
        double dv = xp[i] - mean;
        var += dv * dv;
      }
      var /= static_cast<double>(d_);
      const double istd = 1.0 / std::sqrt(var + eps_);
      inv_std_[r] = static_cast<T>(istd);
      T* xh = xhat_.data() + r * d_;
      T* yp = y.data() + r * d_;
      for (int64_t i = 0; i < d_; ++i) {
        xh[i] = static_cast<T>((xp[i] - mean) * istd);
        yp[i] = gamma_.value[i] * xh[i] + beta_.value[i];
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int64_t rows = dy.numel() / d_;
    Tensor<T> dx(dy.shape());
    const int workers = num_workers();
    std::vector<std::vector<double>> pg(workers, std::vector<double>(2 * d_, 0.0));
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r) {
      double* acc = pg[static_cast<size_t>(worker_index())].data();
      const T* dyp = dy.data() + r * d_;
      const T* xh = xhat_.data() + r * d_;
      T* dxp = dx.data() + r * d_;
      const double istd = inv_std_[r];
      double sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (int64_t i = 0; i < d_; ++i) {
        double dxh = dyp[i] * static_cast<double>(gamma_.value[i]);
        sum_dxhat += dxh;
        sum_dxhat_xhat += dxh * xh[i];
        acc[i] += dyp[i] * xh[i];
        acc[d_ + i] += dyp[i];
      }
      const double inv_d = 1.0 / static_cast<double>(d_);
      for (int64_t i = 0; i < d_; ++i) {
        double dxh = dyp[i] * static_cast<double>(gamma_.value[i]);
        dxp[i] = static_cast<T>(istd * (dxh - inv_d * sum_dxhat - xh[i] * inv_d * sum_dxhat_xhat));
      }
    }
    for (const auto& acc : pg) {
      for (int64_t i = 0; i < d_; ++i) {
        gamma_.grad[i] += static_cast<T>(acc[i]);
        beta_.grad[i] += static_cast<T>(acc[d_ + i]);
      }
    }
    return dx;
  }

 private:
  std::string name_;
  int64_t d_ = 0;
  double eps_ = 1e-5;
  Param<T> gamma_, beta_;
  Tensor<T> xhat_, inv_std_;
};

}  // namespace earshot::nn
