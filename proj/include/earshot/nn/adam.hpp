#pragma once

#include <cmath>
#include <vector>

#include "earshot/nn/tensor.hpp"

namespace earshot::nn {

template <typename T>
class Adam {
 public:
  Adam(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void attach(const ParamRefs<T>& params) {
    params_ = params;
    m_.clear();
    v_.clear();
    for (auto* p : params_) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
    step_ = 0;
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  int64_t step_count() const { return step_; }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  void step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(step_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
      auto* p = params_[pi];
      auto& m = m_[pi];
      auto& v = v_[pi];
#pragma omp parallel for schedule(static)
      for (int64_t i = 0; i < p->value.numel(); ++i) {
        const double g = p->grad[i];
        const double mi = b1_ * m[i] + (1.0 - b1_) * g;
        const double vi = b2_ * v[i] + (1.0 - b2_) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        p->value[i] -= static_cast<T>(lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_));
      }
    }
  }

  // Serialized optimizer state (m, v, step) for checkpoint resume.
  std::vector<Tensor<T>>& moment1() { return m_; }
  std::vector<Tensor<T>>& moment2() { return v_; }
  void set_step_count(int64_t s) { step_ = s; }

 private:
  double lr_, b1_, b2_, eps_;
  int64_t step_ = 0;
  ParamRefs<T> params_;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace earshot::nn
