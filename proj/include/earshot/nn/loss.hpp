#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

template <typename T>
struct LossResult {
  double loss = 0;
  Tensor<T> dlogits;
};

// Mean two-class pixelwise cross entropy.
// logits: [N, 2, F, H, W]; labels: [N, F, H, W] in {0,1}.
// Per-(n,f) partials are summed serially so the value is identical for any
// worker count.
template <typename T>
LossResult<T> pixelwise_ce(const Tensor<T>& logits, const Tensor<uint8_t>& labels) {
  const int64_t N = logits.dim(0), F = logits.dim(2), H = logits.dim(3), W = logits.dim(4);
  if (logits.dim(1) != 2) throw std::invalid_argument("pixelwise_ce: expected 2 channels");
  if (labels.numel() != N * F * H * W) throw std::invalid_argument("pixelwise_ce: label shape");
  const int64_t plane = H * W;
  const int64_t sc = F * plane;  // channel stride
  LossResult<T> res;
  res.dlogits.resize(logits.shape());
  std::vector<double> partial(static_cast<size_t>(N * F), 0.0);
  const double inv_count = 1.0 / static_cast<double>(N * F * plane);

#pragma omp parallel for schedule(static) collapse(2)
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t f = 0; f < F; ++f) {
      const T* l0 = logits.data() + (n * 2) * sc + f * plane;
      const T* l1 = l0 + sc;
      T* d0 = res.dlogits.data() + (n * 2) * sc + f * plane;
      T* d1 = d0 + sc;
      const uint8_t* lab = labels.data() + (n * F + f) * plane;
      double acc = 0;
      for (int64_t i = 0; i < plane; ++i) {
        const double a = l0[i], b = l1[i];
        const double mx = a > b ? a : b;
        const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
        const double ly = lab[i] ? b : a;
        acc += lse - ly;
        const double p1 = std::exp(b - lse);
        const double p0 = std::exp(a - lse);
        d0[i] = static_cast<T>((p0 - (lab[i] ? 0.0 : 1.0)) * inv_count);
        d1[i] = static_cast<T>((p1 - (lab[i] ? 1.0 : 0.0)) * inv_count);
      }
      partial[static_cast<size_t>(n * F + f)] = acc;
    }
  }
  double total = 0;
  for (double p : partial) total += p;
  res.loss = total * inv_count;
  return res;
}

// Cross entropy with the attended-class probability gated by a mask before
// renormalization: p1' = p1*m / (p0 + p1*m). With m=1 everywhere this equals
// pixelwise_ce; where m=0 the attended probability is exactly 0.
// Precondition: every label=1 pixel has mask=1.
template <typename T>
LossResult<T> masked_attended_ce(const Tensor<T>& logits, const Tensor<uint8_t>& labels,
                                 const Tensor<uint8_t>& mask) {
  const int64_t N = logits.dim(0), F = logits.dim(2), H = logits.dim(3), W = logits.dim(4);
  if (logits.dim(1) != 2) throw std::invalid_argument("masked_attended_ce: expected 2 channels");
  const int64_t plane = H * W;
  const int64_t sc = F * plane;
  LossResult<T> res;
  res.dlogits.resize(logits.shape());
  std::vector<double> partial(static_cast<size_t>(N * F), 0.0);
  const double inv_count = 1.0 / static_cast<double>(N * F * plane);

#pragma omp parallel for schedule(static) collapse(2)
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t f = 0; f < F; ++f) {
      const T* l0 = logits.data() + (n * 2) * sc + f * plane;
      const T* l1 = l0 + sc;
      T* d0 = res.dlogits.data() + (n * 2) * sc + f * plane;
      T* d1 = d0 + sc;
      const uint8_t* lab = labels.data() + (n * F + f) * plane;
      const uint8_t* mk = mask.data() + (n * F + f) * plane;
      double acc = 0;
      for (int64_t i = 0; i < plane; ++i) {
        const double a = l0[i], b = l1[i];
        const double mx = a > b ? a : b;
        const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
        const double p0 = std::exp(a - lse);
        const double p1 = std::exp(b - lse);
        const double m = mk[i] ? 1.0 : 0.0;
        const double z = p0 + p1 * m;
        const double py = lab[i] ? (p1 * m / z) : (p0 / z);
        acc += -std::log(py > 1e-300 ? py : 1e-300);
        const double common = p0 * p1 * (1.0 - m) / z;
        double g0, g1;
        if (lab[i]) {
          g0 = p0 + common;
          g1 = -p0 + p0 * p1 * (m - 1.0) / z;
        } else {
          g0 = -p1 + common;
          g1 = p1 - common;
        }
        d0[i] = static_cast<T>(g0 * inv_count);
        d1[i] = static_cast<T>(g1 * inv_count);
      }
      partial[static_cast<size_t>(n * F + f)] = acc;
    }
  }
  double total = 0;
  for (double p : partial) total += p;
  res.loss = total * inv_count;
  return res;
}

// Softmax probability of the attended channel: [N,2,F,H,W] -> [N,F,H,W].
template <typename T>
Tensor<float> attended_probability(const Tensor<T>& logits) {
  const int64_t N = logits.dim(0), F = logits.dim(2), plane = logits.dim(3) * logits.dim(4);
  const int64_t sc = F * plane;
  Tensor<float> prob({N, F, logits.dim(3), logits.dim(4)});
#pragma omp parallel for schedule(static) collapse(2)
  for (int64_t n = 0; n < N; ++n) {
    for (int64_t f = 0; f < F; ++f) {
      const T* l0 = logits.data() + (n * 2) * sc + f * plane;
      const T* l1 = l0 + sc;
      float* pp = prob.data() + (n * F + f) * plane;
      for (int64_t i = 0; i < plane; ++i) {
        const double d = static_cast<double>(l0[i]) - static_cast<double>(l1[i]);
        pp[i] = static_cast<float>(1.0 / (1.0 + std::exp(d)));
      }
    }
  }
  return prob;
}

}  // namespace earshot::nn
