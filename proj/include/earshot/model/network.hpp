#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "earshot/core/common.hpp"
#include "earshot/model/config.hpp"
#include "earshot/model/decoder.hpp"
#include "earshot/model/resnet3d.hpp"
#include "earshot/nn/linear.hpp"
#include "earshot/nn/shape_ops.hpp"
#include "earshot/nn/transformer.hpp"

namespace earshot::model {

// The full heatmap network. Wiring per variant:
//   encoders -> (pool audio T->1) -> fuse -> [transformer] -> decoder
// Missing modalities are replaced by a learned constant grid so the fusion
// and decoder shapes never change within a profile. In the nonaligned
// variant each modality becomes its own 182-token sequence and the joint
// 364-token attention runs before channel concatenation.
template <typename T>
class Network {
 public:
  explicit Network(const ModelConfig& cfg) : cfg_(cfg), arch_(cfg.arch()) {
    const int64_t c = arch_.enc_widths.back();
    const int64_t d = arch_.token_dim;
    grid_h_ = grid_dim(kImageH);
    grid_w_ = grid_dim(kImageW);
    const int64_t l = grid_h_ * grid_w_;

    if (variant_has_visual(cfg_.variant)) {
      vis_enc_ = std::make_unique<ResNet3d<T>>("vis_enc", 1, arch_);
    } else {
      vis_const_.name = "vis_const";
      vis_const_.init_shape({c, 1, grid_h_, grid_w_});
    }
    if (variant_has_audio(cfg_.variant)) {
      aud_enc_ = std::make_unique<ResNet3d<T>>("aud_enc", cfg_.audio_in_channels, arch_);
    } else {
      aud_const_.name = "aud_const";
      aud_const_.init_shape({c, 1, grid_h_, grid_w_});
    }

    if (variant_nonaligned(cfg_.variant)) {
      vis_tok_proj_ = std::make_unique<nn::Linear<T>>("vis_tok_proj", c, d);
      aud_tok_proj_ = std::make_unique<nn::Linear<T>>("aud_tok_proj", c, d);
      tf_ = std::make_unique<nn::TransformerEncoder<T>>("tf", 2 * l, d, arch_.tf_heads,
                                                        arch_.tf_blocks);
      fuse_proj_ = std::make_unique<nn::Conv3d<T>>("fuse_proj", 2 * d, d,
                                                   std::array<int, 3>{1, 1, 1},
                                                   std::array<int, 3>{1, 1, 1},
                                                   std::array<int, 3>{0, 0, 0}, true);
    } else {
      fuse_proj_ = std::make_unique<nn::Conv3d<T>>("fuse_proj", 2 * c, d,
                                                   std::array<int, 3>{1, 1, 1},
                                                   std::array<int, 3>{1, 1, 1},
                                                   std::array<int, 3>{0, 0, 0}, true);
      if (variant_has_transformer(cfg_.variant)) {
        tf_ = std::make_unique<nn::TransformerEncoder<T>>("tf", l, d, arch_.tf_heads,
                                                          arch_.tf_blocks);
      }
    }
    decoder_ = std::make_unique<HeatmapDecoder<T>>("decoder", d, arch_);
  }

  void init(uint64_t seed) {
    nn::Rng rng(derive_seed(seed, 0x6d6f64656cull));
    if (vis_enc_) vis_enc_->init(rng);
    if (aud_enc_) aud_enc_->init(rng);
    if (vis_tok_proj_) vis_tok_proj_->init(rng);
    if (aud_tok_proj_) aud_tok_proj_->init(rng);
    fuse_proj_->init(rng);
    if (tf_) tf_->init(rng);
    decoder_->init(rng);
  }

  nn::ParamRefs<T> params() {
    nn::ParamRefs<T> out;
    if (vis_enc_) vis_enc_->collect(out);
    else out.push_back(&vis_const_);
    if (aud_enc_) aud_enc_->collect(out);
    else out.push_back(&aud_const_);
    if (vis_tok_proj_) vis_tok_proj_->collect(out);
    if (aud_tok_proj_) aud_tok_proj_->collect(out);
    fuse_proj_->collect(out);
    if (tf_) tf_->collect(out);
    decoder_->collect(out);
    return out;
  }

  int64_t param_count() {
    int64_t n = 0;
    for (auto* p : params()) n += p->value.numel();
    return n;
  }

  // vis: [N,1,8,200,212] or null; aud: [N,Ca,24,200,212] or null.
  Tensor<T> forward(const Tensor<T>* vis, const Tensor<T>* aud) {
    if (variant_has_visual(cfg_.variant) && vis == nullptr) {
      throw std::invalid_argument("network: variant requires visual input");
    }
    if (variant_has_audio(cfg_.variant) && aud == nullptr) {
      throw std::invalid_argument("network: variant requires audio input");
    }
    const int64_t n = vis ? vis->dim(0) : aud->dim(0);
    batch_ = n;

    if (vis_enc_) {
      check_input(*vis, 1, kVisFrames, "visual");
      zv_ = vis_enc_->forward(*vis);
    } else {
      zv_ = broadcast_const(vis_const_, n);
    }
    if (aud_enc_) {
      check_input(*aud, cfg_.audio_in_channels, kClipFrames, "audio");
      za_pre_ = aud_enc_->forward(*aud);
      za_ = aud_pool_.forward(za_pre_);
    } else {
      za_ = broadcast_const(aud_const_, n);
    }

    Tensor<T> dec_in;
    if (variant_nonaligned(cfg_.variant)) {
      Tensor<T> tv = vis_tok_proj_->forward(nn::grid_to_tokens(zv_));
      Tensor<T> ta = aud_tok_proj_->forward(nn::grid_to_tokens(za_));
      tokens_in_ = nn::concat_tokens(tv, ta);
      Tensor<T> refined = tf_->forward(tokens_in_);
      Tensor<T> rv, ra;
      nn::split_tokens(refined, rv, ra, grid_h_ * grid_w_);
      fused_ = nn::concat_channels(nn::tokens_to_grid(rv, grid_h_, grid_w_),
                                   nn::tokens_to_grid(ra, grid_h_, grid_w_));
      dec_in = fuse_proj_->forward(fused_);
    } else {
      fused_ = nn::concat_channels(zv_, za_);
      Tensor<T> h = fuse_proj_->forward(fused_);
      if (tf_) {
        tokens_in_ = nn::grid_to_tokens(h);
        dec_in = nn::tokens_to_grid(tf_->forward(tokens_in_), grid_h_, grid_w_);
      } else {
        dec_in = h;
      }
    }
    return decoder_->forward(dec_in);
  }

  void backward(const Tensor<T>& dlogits) {
    Tensor<T> g = decoder_->backward(dlogits);
    Tensor<T> dzv, dza;
    if (variant_nonaligned(cfg_.variant)) {
      Tensor<T> dfused = fuse_proj_->backward(g);
      Tensor<T> dgv, dga;
      nn::split_channels(dfused, dgv, dga, arch_.token_dim);
      Tensor<T> dref = nn::concat_tokens(nn::grid_to_tokens(dgv), nn::grid_to_tokens(dga));
      Tensor<T> dtok = tf_->backward(dref);
      Tensor<T> dtv, dta;
      nn::split_tokens(dtok, dtv, dta, grid_h_ * grid_w_);
      dzv = nn::tokens_to_grid(vis_tok_proj_->backward(dtv), grid_h_, grid_w_);
      dza = nn::tokens_to_grid(aud_tok_proj_->backward(dta), grid_h_, grid_w_);
    } else {
      Tensor<T> dh = tf_ ? nn::tokens_to_grid(tf_->backward(nn::grid_to_tokens(g)), grid_h_,
                                              grid_w_)
                         : std::move(g);
      Tensor<T> dfused = fuse_proj_->backward(dh);
      nn::split_channels(dfused, dzv, dza, zv_.dim(1));
    }
    if (vis_enc_) {
      vis_input_grad_ = vis_enc_->backward(dzv);
    } else {
      accumulate_const(vis_const_, dzv);
    }
    if (aud_enc_) {
      aud_input_grad_ = aud_enc_->backward(aud_pool_.backward(dza));
    } else {
      accumulate_const(aud_const_, dza);
    }
  }

  // Probes for shape and wiring tests.
  const Tensor<T>& zv() const { return zv_; }
  const Tensor<T>& za_prepool() const { return za_pre_; }
  const Tensor<T>& za_pooled() const { return za_; }
  const Tensor<T>& fused() const { return fused_; }
  const Tensor<T>& tokens_in() const { return tokens_in_; }
  int64_t token_len() const { return tf_ ? tf_->seq_len() : 0; }
  int64_t grid_h() const { return grid_h_; }
  int64_t grid_w() const { return grid_w_; }
  const ModelConfig& config() const { return cfg_; }
  nn::TransformerEncoder<T>* transformer() { return tf_.get(); }

 private:
  int64_t grid_dim(int64_t in) const {
    int64_t v = nn::conv_out_dim(in, 7, arch_.stem_hw_stride, 3);
    int strided_stages = arch_.stem_hw_stride == 2 ? 3 : 2;  // stages with spatial /2
    for (int i = 0; i < strided_stages; ++i) v = nn::conv_out_dim(v, 3, 2, 1);
    return v;
  }

  void check_input(const Tensor<T>& x, int64_t ch, int64_t frames, const char* what) const {
    if (x.rank() != 5 || x.dim(1) != ch || x.dim(2) != frames || x.dim(3) != kImageH ||
        x.dim(4) != kImageW) {
      throw std::invalid_argument(std::string("network: bad ") + what + " input shape " +
                                  x.shape_str());
    }
  }

  Tensor<T> broadcast_const(const nn::Param<T>& p, int64_t n) const {
    Tensor<T> out({n, p.value.dim(0), 1, p.value.dim(2), p.value.dim(3)});
    for (int64_t i = 0; i < n; ++i) {
      std::copy(p.value.data(), p.value.data() + p.value.numel(),
                out.data() + i * p.value.numel());
    }
    return out;
  }

  void accumulate_const(nn::Param<T>& p, const Tensor<T>& grad) {
    const int64_t per = p.value.numel();
    for (int64_t i = 0; i < grad.dim(0); ++i) {
      for (int64_t j = 0; j < per; ++j) p.grad[j] += grad[i * per + j];
    }
  }

  ModelConfig cfg_;
  ModelConfig::Arch arch_;
  int64_t grid_h_ = 0, grid_w_ = 0, batch_ = 0;

  std::unique_ptr<ResNet3d<T>> vis_enc_, aud_enc_;
  nn::Param<T> vis_const_, aud_const_;
  nn::TemporalMeanPool<T> aud_pool_;
  std::unique_ptr<nn::Linear<T>> vis_tok_proj_, aud_tok_proj_;
  std::unique_ptr<nn::Conv3d<T>> fuse_proj_;
  std::unique_ptr<nn::TransformerEncoder<T>> tf_;
  std::unique_ptr<HeatmapDecoder<T>> decoder_;

  Tensor<T> zv_, za_pre_, za_, fused_, tokens_in_;
  Tensor<T> vis_input_grad_, aud_input_grad_;
};

}  // namespace earshot::model
