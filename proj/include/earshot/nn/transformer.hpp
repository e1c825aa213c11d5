#pragma once

#include <memory>
#include <string>
#include <vector>

#include "earshot/nn/activation.hpp"
#include "earshot/nn/attention.hpp"
#include "earshot/nn/linear.hpp"
#include "earshot/nn/norm.hpp"

namespace earshot::nn {

// Pre-norm transformer block: x += MHSA(LN(x)); x += FFN(LN(x)).
template <typename T>
class TransformerBlock {
 public:
  TransformerBlock(std::string name, int64_t dim, int64_t heads, int64_t ffn_mult = 4)
      : ln1_(name + ".ln1", dim), attn_(name + ".attn", dim, heads), ln2_(name + ".ln2", dim),
        fc1_(name + ".fc1", dim, dim * ffn_mult), fc2_(name + ".fc2", dim * ffn_mult, dim) {}

  void init(Rng& rng) {
    attn_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
  }

  void collect(ParamRefs<T>& out) {
    ln1_.collect(out);
    attn_.collect(out);
    ln2_.collect(out);
    fc1_.collect(out);
    fc2_.collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> a = attn_.forward(ln1_.forward(x));
    Tensor<T> mid(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) mid[i] = x[i] + a[i];
    Tensor<T> f = fc2_.forward(gelu_.forward(fc1_.forward(ln2_.forward(mid))));
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.numel(); ++i) y[i] = mid[i] + f[i];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dmid = ln2_.backward(fc1_.backward(gelu_.backward(fc2_.backward(dy))));
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < dy.numel(); ++i) dmid[i] += dy[i];
    Tensor<T> dx = ln1_.backward(attn_.backward(dmid));
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < dy.numel(); ++i) dx[i] += dmid[i];
    return dx;
  }

 private:
  LayerNorm<T> ln1_;
  MultiHeadSelfAttention<T> attn_;
  LayerNorm<T> ln2_;
  Linear<T> fc1_, fc2_;
  Gelu<T> gelu_;
};

// Stack of blocks with a learnable positional embedding added up front.
template <typename T>
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(std::string name, int64_t seq_len, int64_t dim, int64_t heads,
                     int64_t depth)
      : name_(std::move(name)), l_(seq_len), d_(dim) {
    pos_.name = name_ + ".pos_embed";
    pos_.init_shape({l_, d_});
    for (int64_t b = 0; b < depth; ++b) {
      blocks_.push_back(std::make_unique<TransformerBlock<T>>(
          name_ + ".block" + std::to_string(b), dim, heads));
    }
  }

  void init(Rng& rng) {
    pos_.value.randn(rng, 0.02);
    for (auto& b : blocks_) b->init(rng);
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&pos_);
    for (auto& b : blocks_) b->collect(out);
  }

  int64_t seq_len() const { return l_; }

  // x: [N, L, D]
  Tensor<T> forward(const Tensor<T>& x) {
    if (x.dim(1) != l_ || x.dim(2) != d_) {
      throw std::invalid_argument(name_ + ": bad token shape " + x.shape_str());
    }
    const int64_t N = x.dim(0);
    Tensor<T> h(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t i = 0; i < l_ * d_; ++i) {
        h[n * l_ * d_ + i] = x[n * l_ * d_ + i] + pos_.value[i];
      }
    }
    for (auto& b : blocks_) h = b->forward(h);
    return h;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> g = dy;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
    const int64_t N = g.dim(0);
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t i = 0; i < l_ * d_; ++i) pos_.grad[i] += g[n * l_ * d_ + i];
    }
    return g;
  }

  Param<T>& pos_embed() { return pos_; }

 private:
  std::string name_;
  int64_t l_ = 0, d_ = 0;
  Param<T> pos_;
  std::vector<std::unique_ptr<TransformerBlock<T>>> blocks_;
};

}  // namespace earshot::nn
