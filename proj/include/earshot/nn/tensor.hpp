#pragma once

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "earshot/core/rng.hpp"

namespace earshot::nn {

using Rng = ::earshot::Rng;

// Dense row-major tensor. Shapes are small, data can be large; everything is
// owned and contiguous. Layers index into raw data with explicit stride math.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) { resize(std::move(shape)); }
  Tensor(std::initializer_list<int64_t> shape) { resize(std::vector<int64_t>(shape)); }

  void resize(std::vector<int64_t> shape) {
    shape_ = std::move(shape);
    int64_t n = 1;
    for (int64_t d : shape_) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dim");
      n *= d;
    }
    data_.assign(static_cast<size_t>(n), T(0));
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T(0)); }

  // Reinterprets the buffer with a new shape of equal element count.
  Tensor<T>& reshape(std::vector<int64_t> shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    if (n != numel()) throw std::invalid_argument("Tensor::reshape: numel mismatch");
    shape_ = std::move(shape);
    return *this;
  }

  bool same_shape(const Tensor<T>& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape_.size(); ++i) {
      s += std::to_string(shape_[i]);
      if (i + 1 < shape_.size()) s += ",";
    }
    return s + ")";
  }

  void randn(Rng& rng, double sigma) {
    for (auto& v : data_) v = static_cast<T>(rng.normal(0.0, sigma));
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (int64_t i = 0; i < numel(); ++i) out[i] = static_cast<U>(data_[static_cast<size_t>(i)]);
    return out;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

// A trainable parameter: value plus accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void init_shape(std::vector<int64_t> shape) {
    value.resize(shape);
    grad.resize(shape);
  }
  void zero_grad() { grad.zero(); }
};

template <typename T>
using ParamRefs = std::vector<Param<T>*>;

}  // namespace earshot::nn
