#pragma once

#include <cstdint>
#include <vector>

#include "earshot/audio/render.hpp"

namespace earshot::feat {

// "201 frequency bins" pins the DFT length to 400; window and hop are read
// literally in samples. The window is rectangular and zero-padded to the DFT
// length, so the transform is computed exactly as a (bins x window) DFT
// matrix product. window_samples is config-exposed for the full-window
// alternative reading.
struct StftConfig {
  int bins = 201;
  int window_samples = 20;
  int hop_samples = 10;

  int fft_len() const { return 2 * (bins - 1); }
  int frames_out() const { return kSamplesPerFrame / hop_samples + 1; }
};

// Vertical stack of per-channel spectrograms: rows [bins*k, bins*(k+1))
// belong to channel k; one column per hop (201 for the default config).
struct SpectrogramStack {
  int rows = 0, cols = 0;
  std::vector<float> real;  // row-major rows x cols
  std::vector<float> imag;
};

SpectrogramStack stft_stack(const audio::AudioFrame& frame, const StftConfig& cfg = {});

// Inverse of stft_stack for one channel; validates the transform parameters.
std::vector<float> istft_channel(const SpectrogramStack& stack, int channel,
                                 const StftConfig& cfg = {});

}  // namespace earshot::feat
