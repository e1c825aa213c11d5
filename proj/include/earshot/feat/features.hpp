#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "earshot/feat/correlation.hpp"
#include "earshot/feat/stft.hpp"
#include "earshot/nn/tensor.hpp"
#include "earshot/sim/types.hpp"

namespace earshot::feat {

enum class VisualMode { Image, Bbox, Heads };

VisualMode visual_mode_from_string(const std::string& s);
const char* to_string(VisualMode m);

struct FeaturizeConfig {
  VisualMode visual_mode = VisualMode::Heads;
  StftConfig stft;
  bool alt_channel_stack = false;  // per-channel spectrogram planes instead
                                   // of the vertical stack (2C+1 channels)

  int audio_planes(int channels) const { return alt_channel_stack ? 2 * channels + 1 : 3; }
  std::string param_hash() const;
};

// Plain bilinear resize (align-corners), row-major single plane.
void bilinear_resize(const float* src, int sh, int sw, float* dst, int dh, int dw);

// 8 grayscale frames + annotations -> [1, 8, 200, 212] in [0,1].
nn::Tensor<float> visual_input(const std::vector<std::vector<uint8_t>>& frames,
                               const std::vector<sim::FrameAnnotation>& annotations,
                               VisualMode mode);

// One audio frame -> stacked feature planes resized to 200x212:
// plane 0 correlation, plane 1 real spectrogram, plane 2 imaginary (or the
// 2C+1 per-channel layout when alt_channel_stack is set).
void audio_frame_feature(const audio::AudioFrame& frame, const FeaturizeConfig& cfg, float* out);

// 24 audio frames -> [planes, 24, 200, 212].
nn::Tensor<float> audio_input(const std::vector<audio::AudioFrame>& frames,
                              const FeaturizeConfig& cfg);

}  // namespace earshot::feat
