#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "earshot/core/rng.hpp"
#include "earshot/feat/correlation.hpp"
#include "earshot/feat/features.hpp"
#include "earshot/feat/stft.hpp"

using namespace earshot;
using audio::AudioFrame;

namespace {

AudioFrame make_frame(int channels) {
  AudioFrame f;
  f.channels = channels;
  f.samples.assign(static_cast<size_t>(channels) * kSamplesPerFrame, 0.f);
  return f;
}

}  // namespace

TEST_CASE("stft stack: shapes are 1206 x 201 and zero input maps to zero") {
  AudioFrame f = make_frame(6);
  const auto stack = feat::stft_stack(f);
  CHECK(stack.rows == 1206);
  CHECK(stack.cols == 201);
  for (float v : stack.real) CHECK(v == 0.f);
  for (float v : stack.imag) CHECK(v == 0.f);
}

TEST_CASE("stft: cosine at a bin center concentrates column energy in that row") {
  // Bin k of the 400-point DFT sits at k * fs / 400 Hz. With a 20-sample
  // rectangular window the mainlobe spans +-20 bins, so compare against the
  // analytic DFT of the windowed cosine.
  AudioFrame f = make_frame(6);
  const int bin = 50;
  const double freq = static_cast<double>(bin) * kSampleRate / 400.0;
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    f.channel(2)[i] = static_cast<float>(std::cos(2 * M_PI * freq * i / kSampleRate));
  }
  const auto stack = feat::stft_stack(f);
  // Analytic DFT of a 20-sample cosine window segment, mid column.
  const int col = 100;  // centered at sample 1000
  const int row_base = 2 * 201;
  double analytic[201];
  for (int k = 0; k < 201; ++k) {
    double re = 0, im = 0;
    for (int n = 0; n < 20; ++n) {
      const int64_t idx = col * 10 - 10 + n;
      const double x = std::cos(2 * M_PI * freq * idx / kSampleRate);
      re += x * std::cos(2 * M_PI * k * n / 400.0);
      im -= x * std::sin(2 * M_PI * k * n / 400.0);
    }
    analytic[k] = re * re + im * im;
    const double got_re = stack.real[static_cast<size_t>(row_base + k) * 201 + col];
    const double got_im = stack.imag[static_cast<size_t>(row_base + k) * 201 + col];
    CHECK(std::abs(got_re * got_re + got_im * got_im - analytic[k]) < 1e-4);
  }
  // Energy concentration around the driven bin (window mainlobe width 20).
  double total = 0, near = 0;
  for (int k = 0; k < 201; ++k) {
    total += analytic[k];
    if (std::abs(k - bin) <= 20) near += analytic[k];
  }
  CHECK(near / total >= 0.8);

  // Other channels stay zero.
  for (int k = 0; k < 201; ++k) {
    CHECK(stack.real[static_cast<size_t>(k) * 201 + col] == 0.f);
  }
}

TEST_CASE("stft inverse reconstructs the frame (validates the parameters)") {
  Rng rng(5);
  AudioFrame f = make_frame(6);
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    f.channel(3)[i] = static_cast<float>(rng.normal(0.0, 0.5));
  }
  const auto stack = feat::stft_stack(f);
  const auto rec = feat::istft_channel(stack, 3);
  double num = 0, den = 0;
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    const double d = rec[static_cast<size_t>(i)] - f.channel(3)[i];
    num += d * d;
    den += static_cast<double>(f.channel(3)[i]) * f.channel(3)[i];
  }
  CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("stft rejects malformed frames") {
  AudioFrame f;
  f.channels = 6;
  f.samples.assign(6 * 100, 0.f);
  CHECK_THROWS(feat::stft_stack(f));
}

TEST_CASE("correlation: identical channels peak at lag zero with value one") {
  Rng rng(6);
  AudioFrame f = make_frame(6);
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    const float v = static_cast<float>(rng.normal(0.0, 1.0));
    f.channel(1)[i] = v;
    f.channel(4)[i] = v;
  }
  const auto map = feat::channel_correlation(f);
  CHECK(map.pairs == 15);
  CHECK(map.rows == 465);
  CHECK(map.cols == 16);
  // Pair (1,4) index in lexicographic order.
  int pair_idx = -1, idx = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j, ++idx)
      if (i == 1 && j == 4) pair_idx = idx;
  REQUIRE(pair_idx >= 0);
  for (int w = 0; w < 16; ++w) {
    CHECK(map.at(pair_idx, 0, w) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("correlation: a +5 sample delay on channel j peaks at lag +5") {
  Rng rng(7);
  AudioFrame f = make_frame(2);
  std::vector<float> src(kSamplesPerFrame + 5);
  for (auto& v : src) v = static_cast<float>(rng.normal(0.0, 1.0));
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    f.channel(0)[i] = src[static_cast<size_t>(i + 5)];
    f.channel(1)[i] = src[static_cast<size_t>(i)];  // j lags i by 5
  }
  const auto map = feat::channel_correlation(f);
  CHECK(map.pairs == 1);
  for (int w = 0; w < 16; ++w) {
    int best_lag = 0;
    double best = -2;
    for (int lag = -15; lag <= 15; ++lag) {
      if (map.at(0, lag, w) > best) {
        best = map.at(0, lag, w);
        best_lag = lag;
      }
    }
    CHECK(best_lag == 5);
  }
}

TEST_CASE("correlation: independent noise stays small, zero energy stays zero") {
  Rng rng(8);
  AudioFrame f = make_frame(6);
  for (int c = 0; c < 6; ++c) {
    for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
      f.channel(c)[i] = static_cast<float>(rng.normal(0.0, 1.0));
    }
  }
  // Zero out channel 5's third window.
  std::fill(f.channel(5) + 2 * feat::kCorrWindowLen, f.channel(5) + 3 * feat::kCorrWindowLen,
            0.f);
  const auto map = feat::channel_correlation(f);
  int64_t small = 0, cells = 0;
  for (float v : map.values) {
    CHECK(std::abs(v) <= 1.0 + 1e-6);
    small += std::abs(v) < 0.5 ? 1 : 0;
    ++cells;
  }
  CHECK(static_cast<double>(small) / static_cast<double>(cells) >= 0.95);
  // Pair (4,5) window 2 involves the zero-energy window.
  CHECK(map.at(14, 0, 2) == 0.f);
}

TEST_CASE("correlation symmetry: corr(i,j,lag) == corr(j,i,-lag)") {
  Rng rng(9);
  AudioFrame f = make_frame(2);
  for (int c = 0; c < 2; ++c)
    for (int64_t i = 0; i < kSamplesPerFrame; ++i)
      f.channel(c)[i] = static_cast<float>(rng.normal(0.0, 1.0));
  AudioFrame swapped = make_frame(2);
  std::copy(f.channel(1), f.channel(1) + kSamplesPerFrame, swapped.channel(0));
  std::copy(f.channel(0), f.channel(0) + kSamplesPerFrame, swapped.channel(1));
  const auto a = feat::channel_correlation(f);
  const auto b = feat::channel_correlation(swapped);
  for (int lag = -15; lag <= 15; ++lag) {
    for (int w = 0; w < 16; ++w) {
      CHECK(a.at(0, lag, w) == doctest::Approx(b.at(0, -lag, w)).epsilon(1e-6));
    }
  }
}

TEST_CASE("correlation: single channel degenerates to autocorrelation") {
  Rng rng(10);
  AudioFrame f = make_frame(1);
  for (int64_t i = 0; i < kSamplesPerFrame; ++i)
    f.channel(0)[i] = static_cast<float>(rng.normal(0.0, 1.0));
  const auto map = feat::channel_correlation(f);
  CHECK(map.pairs == 1);
  for (int w = 0; w < 16; ++w) CHECK(map.at(0, 0, w) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("visual input: bbox is binary, heads is masked image, image is x/255") {
  std::vector<std::vector<uint8_t>> frames(kVisFrames);
  std::vector<sim::FrameAnnotation> anns(kVisFrames);
  Rng rng(11);
  for (int f = 0; f < kVisFrames; ++f) {
    frames[static_cast<size_t>(f)].resize(static_cast<size_t>(kImageH) * kImageW);
    for (auto& v : frames[static_cast<size_t>(f)]) {
      v = static_cast<uint8_t>(rng.uniform_int(256));
    }
    sim::PersonBox p;
    p.person_id = 1;
    p.x0 = 50;
    p.y0 = 60;
    p.x1 = 70;
    p.y1 = 90;
    anns[static_cast<size_t>(f)].frame_index = f;
    anns[static_cast<size_t>(f)].persons = {p};
  }

  const auto bbox = feat::visual_input(frames, anns, feat::VisualMode::Bbox);
  CHECK(bbox.shape() == std::vector<int64_t>{1, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < bbox.numel(); ++i) {
    CHECK((bbox[i] == 0.f || bbox[i] == 1.f));
  }
  double ones = 0;
  for (int64_t i = 0; i < bbox.numel(); ++i) ones += bbox[i];
  CHECK(ones == kVisFrames * 20 * 30);

  const auto heads = feat::visual_input(frames, anns, feat::VisualMode::Heads);
  const auto image = feat::visual_input(frames, anns, feat::VisualMode::Image);
  for (int f = 0; f < kVisFrames; ++f) {
    for (int y = 0; y < kImageH; ++y) {
      for (int x = 0; x < kImageW; ++x) {
        const int64_t i = (static_cast<int64_t>(f) * kImageH + y) * kImageW + x;
        const bool inside = x >= 50 && x < 70 && y >= 60 && y < 90;
        const float px = frames[static_cast<size_t>(f)][static_cast<size_t>(y) * kImageW +
                                                        static_cast<size_t>(x)] /
                         255.f;
        CHECK(std::abs(image[i] - px) <= 1e-7f);
        CHECK(heads[i] == (inside ? image[i] : 0.f));
      }
    }
  }
}

TEST_CASE("visual input rejects wrong frame counts") {
  std::vector<std::vector<uint8_t>> frames(3);
  std::vector<sim::FrameAnnotation> anns(3);
  CHECK_THROWS(feat::visual_input(frames, anns, feat::VisualMode::Bbox));
}

TEST_CASE("audio input: silent clip is zero, shape is 3x24x200x212") {
  std::vector<AudioFrame> frames(kClipFrames, make_frame(6));
  const feat::FeaturizeConfig cfg;
  const auto x = feat::audio_input(frames, cfg);
  CHECK(x.shape() == std::vector<int64_t>{3, kClipFrames, kImageH, kImageW});
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(x[i] == 0.f);
  std::vector<AudioFrame> short_clip(7, make_frame(6));
  CHECK_THROWS(feat::audio_input(short_clip, cfg));
}

TEST_CASE("audio input: per-frame locality") {
  Rng rng(12);
  std::vector<AudioFrame> frames(kClipFrames, make_frame(6));
  const feat::FeaturizeConfig cfg;
  const auto base = feat::audio_input(frames, cfg);
  // Perturb only frame 9.
  for (int c = 0; c < 6; ++c) {
    for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
      frames[9].channel(c)[i] = static_cast<float>(rng.normal(0.0, 1.0));
    }
  }
  const auto pert = feat::audio_input(frames, cfg);
  const int64_t plane = kImageH * kImageW;
  for (int p = 0; p < 3; ++p) {
    for (int t = 0; t < kClipFrames; ++t) {
      double diff = 0;
      for (int64_t i = 0; i < plane; ++i) {
        diff += std::abs(pert[(static_cast<int64_t>(p) * kClipFrames + t) * plane + i] -
                         base[(static_cast<int64_t>(p) * kClipFrames + t) * plane + i]);
      }
      if (t == 9) {
        CHECK(diff > 0);
      } else {
        CHECK(diff == 0);
      }
    }
  }
}

TEST_CASE("bilinear resize of a constant map is exactly constant") {
  std::vector<float> src(465 * 16, 2.5f);
  std::vector<float> dst(static_cast<size_t>(kImageH) * kImageW);
  feat::bilinear_resize(src.data(), 465, 16, dst.data(), kImageH, kImageW);
  for (float v : dst) CHECK(v == 2.5f);
}

TEST_CASE("alternative 13-plane stacking produces 2C+1 planes") {
  Rng rng(13);
  std::vector<AudioFrame> frames(kClipFrames, make_frame(6));
  for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
    frames[0].channel(0)[i] = static_cast<float>(rng.normal(0.0, 1.0));
  }
  feat::FeaturizeConfig cfg;
  cfg.alt_channel_stack = true;
  CHECK(cfg.audio_planes(6) == 13);
  const auto x = feat::audio_input(frames, cfg);
  CHECK(x.shape() == std::vector<int64_t>{13, kClipFrames, kImageH, kImageW});
}
