#pragma once

#include <string>

#include "earshot/core/common.hpp"
#include "earshot/model/config.hpp"
#include "earshot/model/layers_common.hpp"
#include "earshot/nn/activation.hpp"
#include "earshot/nn/conv3d.hpp"
#include "earshot/nn/conv_transpose3d.hpp"
#include "earshot/nn/norm.hpp"
#include "earshot/nn/resize.hpp"

namespace earshot::model {

// Heatmap decoder: four 3D transpose convolutions upsample the 1x13x14 grid
// to 8 frames at ~16x spatial scale, a bilinear resample lands exactly on
// 200x212, and a final convolution produces the 2-class logits.
template <typename T>
class HeatmapDecoder {
 public:
  HeatmapDecoder(const std::string& name, int64_t in_channels, const ModelConfig::Arch& arch)
      : up1_(name + ".up1", in_channels, arch.dec_widths[0], {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, false),
        gn1_(name + ".gn1", arch.dec_widths[0], norm_groups(arch.dec_widths[0])),
        up2_(name + ".up2", arch.dec_widths[0], arch.dec_widths[1], {4, 4, 4}, {2, 2, 2}, {1, 1, 1},
             false),
        gn2_(name + ".gn2", arch.dec_widths[1], norm_groups(arch.dec_widths[1])),
        up3_(name + ".up3", arch.dec_widths[1], arch.dec_widths[2], {4, 4, 4}, {2, 2, 2}, {1, 1, 1},
             false),
        gn3_(name + ".gn3", arch.dec_widths[2], norm_groups(arch.dec_widths[2])),
        up4_(name + ".up4", arch.dec_widths[2], arch.dec_widths[3], arch.dec4_kernel, {1, 2, 2},
             {1, 1, 1}, false),
        gn4_(name + ".gn4", arch.dec_widths[3], norm_groups(arch.dec_widths[3])),
        resize_(kImageH, kImageW),
        classifier_(name + ".classifier", arch.dec_widths[3], 2, {1, 3, 3}, {1, 1, 1}, {0, 1, 1},
                    true) {}

  void init(nn::Rng& rng) {
    up1_.init(rng);
    up2_.init(rng);
    up3_.init(rng);
    up4_.init(rng);
    classifier_.init(rng);
    // Attended pixels are a few percent of the image; start the classifier
    // at that prior so early steps refine boxes instead of fighting the
    // global class balance.
    classifier_.bias().value[0] = T(1.95);
    classifier_.bias().value[1] = T(-1.95);
  }

  void collect(nn::ParamRefs<T>& out) {
    up1_.collect(out);
    gn1_.collect(out);
    up2_.collect(out);
    gn2_.collect(out);
    up3_.collect(out);
    gn3_.collect(out);
    up4_.collect(out);
    gn4_.collect(out);
    classifier_.collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> h = r1_.forward(gn1_.forward(up1_.forward(x)));
    h = r2_.forward(gn2_.forward(up2_.forward(h)));
    h = r3_.forward(gn3_.forward(up3_.forward(h)));
    h = r4_.forward(gn4_.forward(up4_.forward(h)));
    h = resize_.forward(h);
    return classifier_.forward(h);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> g = resize_.backward(classifier_.backward(dy));
    g = up4_.backward(gn4_.backward(r4_.backward(g)));
    g = up3_.backward(gn3_.backward(r3_.backward(g)));
    g = up2_.backward(gn2_.backward(r2_.backward(g)));
    return up1_.backward(gn1_.backward(r1_.backward(g)));
  }

 private:
  nn::ConvTranspose3d<T> up1_;
  nn::GroupNorm<T> gn1_;
  nn::ConvTranspose3d<T> up2_;
  nn::GroupNorm<T> gn2_;
  nn::ConvTranspose3d<T> up3_;
  nn::GroupNorm<T> gn3_;
  nn::ConvTranspose3d<T> up4_;
  nn::GroupNorm<T> gn4_;
  nn::ReLU<T> r1_, r2_, r3_, r4_;
  nn::BilinearResize<T> resize_;
  nn::Conv3d<T> classifier_;
};

}  // namespace earshot::model
