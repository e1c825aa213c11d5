#include "earshot/feat/features.hpp"

#include <cstring>
#include <stdexcept>

#include "earshot/core/hash.hpp"
#include "earshot/nn/resize.hpp"
#include "earshot/sim/projection.hpp"

namespace earshot::feat {

VisualMode visual_mode_from_string(const std::string& s) {
  if (s == "image") return VisualMode::Image;
  if (s == "bbox") return VisualMode::Bbox;
  if (s == "heads") return VisualMode::Heads;
  throw ConfigError("unknown visual mode: " + s);
}

const char* to_string(VisualMode m) {
  switch (m) {
    case VisualMode::Image: return "image";
    case VisualMode::Bbox: return "bbox";
    case VisualMode::Heads: return "heads";
  }
  return "?";
}

std::string FeaturizeConfig::param_hash() const {
  Fnv1a h;
  h.update(std::string("feat/v1|"));
  h.update(std::string(to_string(visual_mode)));
  int vals[4] = {stft.bins, stft.window_samples, stft.hop_samples, alt_channel_stack ? 1 : 0};
  h.update(vals, sizeof(vals));
  return h.hex();
}

void bilinear_resize(const float* src, int sh, int sw, float* dst, int dh, int dw) {
  const nn::BilinearAxis ay(sh, dh), ax(sw, dw);
  for (int y = 0; y < dh; ++y) {
    const float* r0 = src + ay.i0[y] * sw;
    const float* r1 = src + ay.i1[y] * sw;
    const float fy = ay.w1[y];
    float* out = dst + static_cast<int64_t>(y) * dw;
    for (int x = 0; x < dw; ++x) {
      const float fx = ax.w1[x];
      const float top = r0[ax.i0[x]] + fx * (r0[ax.i1[x]] - r0[ax.i0[x]]);
      const float bot = r1[ax.i0[x]] + fx * (r1[ax.i1[x]] - r1[ax.i0[x]]);
      out[x] = top + fy * (bot - top);
    }
  }
}

nn::Tensor<float> visual_input(const std::vector<std::vector<uint8_t>>& frames,
                               const std::vector<sim::FrameAnnotation>& annotations,
                               VisualMode mode) {
  if (frames.size() != kVisFrames || annotations.size() != kVisFrames) {
    throw std::invalid_argument("visual_input: expected 8 frames with annotations");
  }
  nn::Tensor<float> out({1, kVisFrames, kImageH, kImageW});
  std::vector<uint8_t> box_mask(static_cast<size_t>(kImageH) * kImageW);
  for (int f = 0; f < kVisFrames; ++f) {
    const auto& img = frames[static_cast<size_t>(f)];
    if (mode != VisualMode::Bbox && img.size() != static_cast<size_t>(kImageH) * kImageW) {
      throw std::invalid_argument("visual_input: bad frame size");
    }
    float* dst = out.data() + static_cast<int64_t>(f) * kImageH * kImageW;
    if (mode == VisualMode::Image) {
      for (int64_t i = 0; i < kImageH * kImageW; ++i) dst[i] = img[static_cast<size_t>(i)] / 255.f;
      continue;
    }
    std::memset(box_mask.data(), 0, box_mask.size());
    for (const auto& p : annotations[static_cast<size_t>(f)].persons) {
      const sim::PixelSpan s = sim::rasterize_box(p.x0, p.y0, p.x1, p.y1);
      for (int y = s.y0; y < s.y1; ++y) {
        std::memset(box_mask.data() + static_cast<size_t>(y) * kImageW + s.x0, 1,
                    static_cast<size_t>(s.x1 - s.x0));
      }
    }
    if (mode == VisualMode::Bbox) {
      for (int64_t i = 0; i < kImageH * kImageW; ++i) dst[i] = box_mask[static_cast<size_t>(i)];
    } else {  // Heads: image values inside boxes, black elsewhere
      for (int64_t i = 0; i < kImageH * kImageW; ++i) {
        dst[i] = box_mask[static_cast<size_t>(i)] ? img[static_cast<size_t>(i)] / 255.f : 0.f;
      }
    }
  }
  return out;
}

void audio_frame_feature(const audio::AudioFrame& frame, const FeaturizeConfig& cfg, float* out) {
  const int plane = kImageH * kImageW;
  const CorrelationMap corr = channel_correlation(frame);
  bilinear_resize(corr.values.data(), corr.rows, corr.cols, out, kImageH, kImageW);
  const SpectrogramStack spec = stft_stack(frame, cfg.stft);
  if (!cfg.alt_channel_stack) {
    bilinear_resize(spec.real.data(), spec.rows, spec.cols, out + plane, kImageH, kImageW);
    bilinear_resize(spec.imag.data(), spec.rows, spec.cols, out + 2 * plane, kImageH, kImageW);
  } else {
    for (int c = 0; c < frame.channels; ++c) {
      const size_t off = static_cast<size_t>(c) * cfg.stft.bins * spec.cols;
      bilinear_resize(spec.real.data() + off, cfg.stft.bins, spec.cols,
                      out + static_cast<int64_t>(1 + c) * plane, kImageH, kImageW);
      bilinear_resize(spec.imag.data() + off, cfg.stft.bins, spec.cols,
                      out + static_cast<int64_t>(1 + frame.channels + c) * plane, kImageH,
                      kImageW);
    }
  }
}

nn::Tensor<float> audio_input(const std::vector<audio::AudioFrame>& frames,
                              const FeaturizeConfig& cfg) {
  if (frames.size() != kClipFrames) {
    throw std::invalid_argument("audio_input: expected 24 audio frames");
  }
  const int planes = cfg.audio_planes(frames[0].channels);
  const int64_t plane = kImageH * kImageW;
  nn::Tensor<float> out({planes, kClipFrames, kImageH, kImageW});
  std::vector<float> scratch(static_cast<size_t>(planes) * plane);
#pragma omp parallel for schedule(static) firstprivate(scratch)
  for (int f = 0; f < kClipFrames; ++f) {
    audio_frame_feature(frames[static_cast<size_t>(f)], cfg, scratch.data());
    for (int p = 0; p < planes; ++p) {
      std::memcpy(out.data() + (static_cast<int64_t>(p) * kClipFrames + f) * plane,
                  scratch.data() + static_cast<int64_t>(p) * plane,
                  static_cast<size_t>(plane) * sizeof(float));
    }
  }
  return out;
}

}  // namespace earshot::feat
