#pragma once

#include <vector>

#include "earshot/audio/mic_array.hpp"

namespace earshot::audio {

// Far-field (plane wave) transfer function: one fractional delay and a unit
// gain per microphone, relative to the head origin.
struct FarFieldAtf {
  std::vector<double> delay_samples;
  std::vector<double> gain;
};

// `direction` is a unit vector from the head origin toward the source, in
// the head frame. A microphone displaced toward the source hears the wave
// earlier, hence delay_m = -(direction . p_m) / c * fs.
FarFieldAtf far_field_atf(const Vec3& direction, const MicArray& array);

// Windowed-sinc fractional delay (32 taps). Reads x[i - delay] with zero
// padding outside [0, n).
void apply_fractional_delay(const float* x, int64_t n, double delay_samples, float gain,
                            float* out, int64_t out_n, int64_t x_offset);

// Convenience: delay+gain a source block through the whole array.
// out has array.channels() rows of block_len samples, accumulated (+=).
void apply_atf(const FarFieldAtf& atf, const float* source, int64_t source_len,
               int64_t block_start, int64_t block_len, float* out);

}  // namespace earshot::audio
