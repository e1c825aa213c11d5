#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "earshot/model/checkpoint.hpp"
#include "earshot/model/network.hpp"
#include "earshot/nn/loss.hpp"

using namespace earshot;
using model::ModelConfig;
using model::Network;
using model::Profile;
using model::Variant;
using nn::Tensor;

namespace {

template <typename T>
Tensor<T> random_visual(Rng& rng, int64_t n = 1) {
  Tensor<T> x({n, 1, kVisFrames, kImageH, kImageW});
  x.randn(rng, 0.5);
  return x;
}

template <typename T>
Tensor<T> random_audio(Rng& rng, int64_t n = 1, int64_t planes = 3) {
  Tensor<T> x({n, planes, kClipFrames, kImageH, kImageW});
  x.randn(rng, 0.5);
  return x;
}

}  // namespace

TEST_CASE("tiny profile: full shape contract across the pipeline") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudiovisualTf;
  Network<float> net(cfg);
  net.init(3);
  Rng rng(4);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng);
  const auto logits = net.forward(&vis, &aud);
  CHECK(net.zv().shape() == std::vector<int64_t>{1, 64, 1, 13, 14});
  CHECK(net.za_prepool().shape() == std::vector<int64_t>{1, 64, 3, 13, 14});
  CHECK(net.za_pooled().shape() == std::vector<int64_t>{1, 64, 1, 13, 14});
  CHECK(net.fused().shape() == std::vector<int64_t>{1, 128, 1, 13, 14});
  CHECK(net.token_len() == 182);
  CHECK(logits.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < logits.numel(); ++i) REQUIRE(std::isfinite(logits[i]));

  // Determinism: same input, same weights, same output.
  const auto again = net.forward(&vis, &aud);
  for (int64_t i = 0; i < logits.numel(); ++i) CHECK(logits[i] == again[i]);
}

TEST_CASE("nonaligned variant runs joint attention over 364 tokens") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudiovisualTfNonaligned;
  Network<float> net(cfg);
  net.init(5);
  Rng rng(6);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng);
  const auto logits = net.forward(&vis, &aud);
  CHECK(net.token_len() == 364);
  CHECK(net.tokens_in().shape() == std::vector<int64_t>{1, 364, 128});
  CHECK(logits.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
}

TEST_CASE("fusion: channel concatenation preserves both halves exactly") {
  Rng rng(7);
  Tensor<float> zv({2, 5, 1, 3, 4});
  Tensor<float> za({2, 5, 1, 3, 4});
  zv.randn(rng, 1.0);
  const auto fused = nn::concat_channels(zv, za);
  CHECK(fused.shape() == std::vector<int64_t>{2, 10, 1, 3, 4});
  const int64_t tail = 12;
  for (int64_t n = 0; n < 2; ++n) {
    for (int64_t c = 0; c < 5; ++c) {
      for (int64_t i = 0; i < tail; ++i) {
        CHECK(fused[(n * 10 + c) * tail + i] == zv[(n * 5 + c) * tail + i]);
        CHECK(fused[(n * 10 + 5 + c) * tail + i] == 0.f);  // zero audio half
      }
    }
  }
}

TEST_CASE("single-modality variants run without the other input") {
  Rng rng(8);
  for (Variant v : {Variant::AudioOnly, Variant::AudioOnlyTf}) {
    ModelConfig cfg;
    cfg.profile = Profile::Tiny;
    cfg.variant = v;
    Network<float> net(cfg);
    net.init(9);
    auto aud = random_audio<float>(rng);
    const auto logits = net.forward(nullptr, &aud);
    CHECK(logits.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
  }
  for (Variant v : {Variant::VisualOnly, Variant::VisualOnlyTf}) {
    ModelConfig cfg;
    cfg.profile = Profile::Tiny;
    cfg.variant = v;
    Network<float> net(cfg);
    net.init(9);
    auto vis = random_visual<float>(rng);
    const auto logits = net.forward(&vis, nullptr);
    CHECK(logits.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
    // Missing-modality input is rejected.
    CHECK_THROWS(net.forward(nullptr, nullptr));
  }
}

TEST_CASE("channel-count ablation only changes the audio stem input") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudiovisualTf;
  cfg.audio_in_channels = 13;  // alt stacking of 6 channels
  Network<float> net(cfg);
  net.init(10);
  Rng rng(11);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng, 1, 13);
  const auto logits = net.forward(&vis, &aud);
  CHECK(logits.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
}

TEST_CASE("audio temporal pooling: constant-in-time features pool to themselves") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudioOnly;
  Network<float> net(cfg);
  net.init(12);
  Rng rng(13);
  // Audio input constant across the 24 frames.
  Tensor<float> aud({1, 3, kClipFrames, kImageH, kImageW});
  std::vector<float> plane_vals(static_cast<size_t>(3) * kImageH * kImageW);
  for (auto& v : plane_vals) v = static_cast<float>(rng.normal(0.0, 0.5));
  const int64_t plane = kImageH * kImageW;
  for (int p = 0; p < 3; ++p) {
    for (int t = 0; t < kClipFrames; ++t) {
      std::copy(plane_vals.begin() + p * plane, plane_vals.begin() + (p + 1) * plane,
                aud.data() + (static_cast<int64_t>(p) * kClipFrames + t) * plane);
    }
  }
  net.forward(nullptr, &aud);
  // Pre-pool slices should be near-identical in time, pooling a no-op.
  const auto& pre = net.za_prepool();
  const auto& post = net.za_pooled();
  const int64_t c_count = pre.dim(1), t_count = pre.dim(2), hw = pre.dim(3) * pre.dim(4);
  for (int64_t c = 0; c < c_count; ++c) {
    for (int64_t t = 0; t < t_count; ++t) {
      for (int64_t i = 0; i < hw; ++i) {
        const float a = pre[(c * t_count + t) * hw + i];
        const float b = post[c * hw + i];
        CHECK(std::abs(a - b) < 1e-4f);
      }
    }
  }
}

TEST_CASE("aligned tokens: sentinel in fused cell (h,w) moves token 14h+w only") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudiovisualTf;
  Network<float> net(cfg);
  net.init(14);
  Rng rng(15);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng);
  net.forward(&vis, &aud);
  const Tensor<float> base_tokens = net.tokens_in();

  // Grid -> token index map, checked directly on the tokenizer.
  Tensor<float> grid({1, 4, 1, 13, 14});
  grid.randn(rng, 1.0);
  const int64_t h = 7, w = 3;
  Tensor<float> grid2 = grid;
  grid2[(0 * 4 + 2) * 182 + h * 14 + w] += 100.f;  // sentinel in channel 2
  const auto ta = nn::grid_to_tokens(grid);
  const auto tb = nn::grid_to_tokens(grid2);
  for (int64_t k = 0; k < 182; ++k) {
    for (int64_t c = 0; c < 4; ++c) {
      const float d = std::abs(tb[k * 4 + c] - ta[k * 4 + c]);
      if (k == h * 14 + w && c == 2) {
        CHECK(d == 100.f);
      } else {
        CHECK(d == 0.f);
      }
    }
  }
  CHECK(base_tokens.dim(1) == 182);
}

TEST_CASE("decoder: zero input with zero parameters gives spatially constant logits") {
  model::HeatmapDecoder<float> dec("d", 128, ModelConfig{Profile::Tiny, Variant::AudiovisualTf, 3}.arch());
  // All parameters stay zero (no init call), so conv outputs are zero and
  // the classifier bias (zero) makes logits exactly constant.
  Tensor<float> x({1, 128, 1, 13, 14});
  const auto y = dec.forward(x);
  CHECK(y.shape() == std::vector<int64_t>{1, 2, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < y.numel(); ++i) CHECK(y[i] == y[0]);
}

TEST_CASE("per-pixel softmax over the two channels sums to one") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::Audiovisual;
  Network<float> net(cfg);
  net.init(16);
  Rng rng(17);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng);
  const auto logits = net.forward(&vis, &aud);
  const auto p1 = nn::attended_probability(logits);
  // p0 from swapped channels; p0 + p1 == 1 within 1e-6.
  const int64_t sc = kVisFrames * kImageH * kImageW;
  for (int64_t i = 0; i < sc; i += 997) {
    const double a = logits[i];
    const double b = logits[sc + i];
    const double e0 = std::exp(a - std::max(a, b)), e1 = std::exp(b - std::max(a, b));
    const double q1 = e1 / (e0 + e1);
    CHECK(std::abs(q1 - p1[i]) < 1e-6);
    CHECK(std::abs((e0 / (e0 + e1)) + q1 - 1.0) < 1e-6);
  }
}

TEST_CASE("checkpoint: round trip restores parameters, hash mismatch refuses") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::Audiovisual;
  Network<float> net(cfg);
  net.init(18);
  nn::Adam<float> opt(1e-3);
  opt.attach(net.params());

  model::CheckpointMeta meta;
  meta.profile = model::to_string(cfg.profile);
  meta.variant = model::to_string(cfg.variant);
  meta.config_hash = "cafe0123";
  meta.dataset_hash = "d5";
  meta.step = 17;
  const std::string path = "/tmp/earshot_ckpt_test.bin";
  model::save_checkpoint(path, net, &opt, meta);

  Network<float> other(cfg);
  other.init(999);
  nn::Adam<float> opt2(1e-3);
  const auto loaded = model::load_checkpoint(path, other, &opt2, "cafe0123", false);
  CHECK(loaded.step == 17);
  auto pa = net.params();
  auto pb = other.params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    for (int64_t j = 0; j < pa[i]->value.numel(); ++j) {
      CHECK(pa[i]->value[j] == pb[i]->value[j]);
    }
  }
  CHECK_THROWS_AS(model::load_checkpoint(path, other, nullptr, "deadbeef", false),
                  HashMismatchError);
  // Forced load ignores the mismatch.
  model::load_checkpoint(path, other, nullptr, "deadbeef", true);
  std::filesystem::remove(path);
}

TEST_CASE("network backward accumulates finite gradients for every parameter") {
  ModelConfig cfg;
  cfg.profile = Profile::Tiny;
  cfg.variant = Variant::AudiovisualTf;
  Network<float> net(cfg);
  net.init(19);
  Rng rng(20);
  auto vis = random_visual<float>(rng);
  auto aud = random_audio<float>(rng);
  const auto logits = net.forward(&vis, &aud);
  Tensor<uint8_t> labels({1, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < labels.numel(); ++i) labels[i] = rng.bernoulli(0.02) ? 1 : 0;
  const auto loss = nn::pixelwise_ce(logits, labels);
  for (auto* p : net.params()) p->zero_grad();
  net.backward(loss.dlogits);
  int64_t nonzero_params = 0;
  for (auto* p : net.params()) {
    double l2 = 0;
    for (int64_t i = 0; i < p->grad.numel(); ++i) {
      REQUIRE(std::isfinite(p->grad[i]));
      l2 += static_cast<double>(p->grad[i]) * p->grad[i];
    }
    nonzero_params += l2 > 0 ? 1 : 0;
  }
  // Every layer should receive some gradient signal.
  CHECK(nonzero_params >= static_cast<int64_t>(net.params().size()) - 2);
}
