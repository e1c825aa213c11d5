#pragma once

#include <limits>
#include <vector>

#include "earshot/audio/atf.hpp"
#include "earshot/audio/voice.hpp"

namespace earshot::audio {

struct RenderConfig {
  double snr_db = std::numeric_limits<double>::infinity();  // sensor noise off
  double wearer_gain = 6.0;      // near-field wearer voice, ~15 dB over far field
  double noise_ref_rms = 0.05;   // reference level for finite SNR
};

// One video frame's worth of array audio: channels x 2000 samples.
struct AudioFrame {
  int channels = 0;
  std::vector<float> samples;  // [channel][sample]

  float* channel(int c) { return samples.data() + static_cast<size_t>(c) * kSamplesPerFrame; }
  const float* channel(int c) const {
    return samples.data() + static_cast<size_t>(c) * kSamplesPerFrame;
  }
};

// Head-frame unit direction from the wearer to participant `pi` at `frame`.
Vec3 source_direction(const sim::Scene& scene, int frame, size_t pi);

// Far-field plane-wave render of all active sources plus the wearer's own
// voice as an equal-gain zero-delay near-field term, plus optional white
// sensor noise. Pure function of its arguments.
AudioFrame render_frame(const sim::Scene& scene, const std::vector<SourceSignal>& sources,
                        int frame, const MicArray& array, const RenderConfig& cfg);

std::vector<AudioFrame> render_scene_audio(const sim::Scene& scene,
                                           const std::vector<SourceSignal>& sources,
                                           const MicArray& array, const RenderConfig& cfg);

}  // namespace earshot::audio
