#include "earshot/audio/atf.hpp"

#include <cmath>

namespace earshot::audio {

MicArray glasses_array(int channels) {
  static const std::vector<Vec3> six = {
      {-0.075, 0.000, -0.020},  // left temple
      {0.075, 0.000, -0.020},   // right temple
      {-0.070, -0.010, 0.060},  // left hinge
      {0.070, -0.010, 0.060},   // right hinge
      {-0.015, 0.008, 0.082},   // nose left
      {0.015, 0.008, 0.082},    // nose right
  };
  if (channels < 1 || channels > 6) throw ConfigError("glasses_array: channels must be 1..6");
  MicArray a;
  // Subsets keep left/right spread where possible.
  static const int pick[7][6] = {{0},      {0},          {0, 1},      {0, 1, 4},
                                 {0, 1, 2, 3}, {0, 1, 2, 3, 4}, {0, 1, 2, 3, 4, 5}};
  for (int i = 0; i < channels; ++i) a.positions.push_back(six[static_cast<size_t>(pick[channels][i])]);
  return a;
}

FarFieldAtf far_field_atf(const Vec3& direction, const MicArray& array) {
  FarFieldAtf atf;
  for (const auto& p : array.positions) {
    atf.delay_samples.push_back(-direction.dot(p) / kSpeedOfSound * array.sample_rate);
    atf.gain.push_back(1.0);
  }
  return atf;
}

namespace {
constexpr int kSincTaps = 32;
constexpr int kSincHalf = kSincTaps / 2;

inline double windowed_sinc(double x, double window_pos) {
  // window_pos in [0, kSincTaps); Hann window.
  const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * (window_pos + 0.5) / kSincTaps);
  if (std::abs(x) < 1e-9) return w;
  return w * std::sin(M_PI * x) / (M_PI * x);
}
}  // namespace

void apply_fractional_delay(const float* x, int64_t n, double delay, float gain, float* out,
                            int64_t out_n, int64_t x_offset) {
  const int64_t di = static_cast<int64_t>(std::floor(delay));
  const double mu = delay - static_cast<double>(di);
  double taps[kSincTaps];
  for (int k = 0; k < kSincTaps; ++k) {
    taps[k] = windowed_sinc(static_cast<double>(k - kSincHalf + 1) - mu,
                            static_cast<double>(k));
  }
  for (int64_t i = 0; i < out_n; ++i) {
    // y[i] = sum_k taps[k] * x[i - di - (k - kSincHalf + 1)]
    const int64_t base = x_offset + i - di + kSincHalf - 1;
    double acc = 0;
    for (int k = 0; k < kSincTaps; ++k) {
      const int64_t idx = base - k;
      if (idx >= 0 && idx < n) acc += taps[k] * x[idx];
    }
    out[i] += gain * static_cast<float>(acc);
  }
}

void apply_atf(const FarFieldAtf& atf, const float* source, int64_t source_len,
               int64_t block_start, int64_t block_len, float* out) {
  for (size_t m = 0; m < atf.delay_samples.size(); ++m) {
    apply_fractional_delay(source, source_len, atf.delay_samples[m],
                           static_cast<float>(atf.gain[m]), out + m * block_len, block_len,
                           block_start);
  }
}

}  // namespace earshot::audio
