#pragma once

#include <memory>
#include <string>
#include <vector>

#include "earshot/model/config.hpp"
#include "earshot/model/layers_common.hpp"
#include "earshot/nn/activation.hpp"
#include "earshot/nn/conv3d.hpp"
#include "earshot/nn/norm.hpp"

namespace earshot::model {

// Residual basic block, GroupNorm variant (statistics independent of batch
// composition, so small-batch CPU training stays stable and deterministic).
template <typename T>
class BasicBlock3d {
 public:
  BasicBlock3d(const std::string& name, int64_t cin, int64_t cout, std::array<int, 3> stride)
      : conv1_(name + ".conv1", cin, cout, {3, 3, 3}, stride, {1, 1, 1}, false, true),
        gn1_(name + ".gn1", cout, norm_groups(cout)),
        conv2_(name + ".conv2", cout, cout, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, false, true),
        gn2_(name + ".gn2", cout, norm_groups(cout)) {
    needs_proj_ = cin != cout || stride != std::array<int, 3>{1, 1, 1};
    if (needs_proj_) {
      proj_ = std::make_unique<nn::Conv3d<T>>(name + ".proj", cin, cout,
                                              std::array<int, 3>{1, 1, 1}, stride,
                                              std::array<int, 3>{0, 0, 0}, false, true);
      proj_gn_ = std::make_unique<nn::GroupNorm<T>>(name + ".proj_gn", cout, norm_groups(cout));
    }
  }

  void init(nn::Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    if (proj_) proj_->init(rng);
  }

  void collect(nn::ParamRefs<T>& out) {
    conv1_.collect(out);
    gn1_.collect(out);
    conv2_.collect(out);
    gn2_.collect(out);
    if (proj_) {
      proj_->collect(out);
      proj_gn_->collect(out);
    }
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> h = gn2_.forward(conv2_.forward(relu1_.forward(gn1_.forward(conv1_.forward(x)))));
    Tensor<T> skip = needs_proj_ ? proj_gn_->forward(proj_->forward(x)) : x;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < h.numel(); ++i) h[i] += skip[i];
    return relu2_.forward(h);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dh = relu2_.backward(dy);
    Tensor<T> dx = conv1_.backward(gn1_.backward(relu1_.backward(conv2_.backward(gn2_.backward(dh)))));
    if (needs_proj_) {
      Tensor<T> dskip = proj_->backward(proj_gn_->backward(dh));
#pragma omp parallel for schedule(static)
      for (int64_t i = 0; i < dx.numel(); ++i) dx[i] += dskip[i];
    } else {
#pragma omp parallel for schedule(static)
      for (int64_t i = 0; i < dx.numel(); ++i) dx[i] += dh[i];
    }
    return dx;
  }

 private:
  nn::Conv3d<T> conv1_;
  nn::GroupNorm<T> gn1_;
  nn::Conv3d<T> conv2_;
  nn::GroupNorm<T> gn2_;
  nn::ReLU<T> relu1_, relu2_;
  bool needs_proj_ = false;
  std::unique_ptr<nn::Conv3d<T>> proj_;
  std::unique_ptr<nn::GroupNorm<T>> proj_gn_;
};

// 3D ResNet-18-style encoder: 7x7 stem + 4 residual stages. With the paper
// profile and a 200x212 input the spatial grid lands on 13x14; temporal
// extent 8 -> 1 and 24 -> 3 for the two input types.
template <typename T>
class ResNet3d {
 public:
  ResNet3d(const std::string& name, int64_t in_channels, const ModelConfig::Arch& arch)
      : stem_(name + ".stem", in_channels, arch.enc_widths[0], {3, 7, 7},
              {1, arch.stem_hw_stride, arch.stem_hw_stride}, {1, 3, 3}, false, true),
        stem_gn_(name + ".stem_gn", arch.enc_widths[0], norm_groups(arch.enc_widths[0])) {
    int64_t cin = arch.enc_widths[0];
    for (size_t stage = 0; stage < arch.enc_widths.size(); ++stage) {
      const int64_t cout = arch.enc_widths[stage];
      std::array<int, 3> stride{1, 1, 1};
      if (stage > 0) stride = {2, 2, 2};
      if (stage == 3) stride = arch.stage4_stride;
      for (int b = 0; b < arch.blocks_per_stage; ++b) {
        blocks_.push_back(std::make_unique<BasicBlock3d<T>>(
            name + ".s" + std::to_string(stage) + "b" + std::to_string(b), cin,
            cout, b == 0 ? stride : std::array<int, 3>{1, 1, 1}));
        cin = cout;
      }
    }
  }

  void init(nn::Rng& rng) {
    stem_.init(rng);
    for (auto& b : blocks_) b->init(rng);
  }

  void collect(nn::ParamRefs<T>& out) {
    stem_.collect(out);
    stem_gn_.collect(out);
    for (auto& b : blocks_) b->collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> h = stem_relu_.forward(stem_gn_.forward(stem_.forward(x)));
    for (auto& b : blocks_) h = b->forward(h);
    return h;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> g = dy;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
    return stem_.backward(stem_gn_.backward(stem_relu_.backward(g)));
  }

 private:
  nn::Conv3d<T> stem_;
  nn::GroupNorm<T> stem_gn_;
  nn::ReLU<T> stem_relu_;
  std::vector<std::unique_ptr<BasicBlock3d<T>>> blocks_;
};

}  // namespace earshot::model
