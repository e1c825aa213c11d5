#pragma once

#include <string>
#include <vector>

#include "earshot/audio/render.hpp"

namespace earshot::audio {

// 32-bit float WAV (format tag 3), channels interleaved per sample.
// Channel order is the mic-array order documented in glasses_array().
void write_wav(const std::string& path, const std::vector<AudioFrame>& frames, int sample_rate);

struct WavData {
  int channels = 0;
  int sample_rate = 0;
  std::vector<float> samples;  // interleaved

  int64_t frames() const {
    return channels > 0 ? static_cast<int64_t>(samples.size()) / channels : 0;
  }
};

WavData read_wav(const std::string& path);

// Splits interleaved WAV data back into per-video-frame channel blocks.
std::vector<AudioFrame> wav_to_frames(const WavData& wav);

}  // namespace earshot::audio
