#pragma once

#include <cstdint>
#include <vector>

#include "earshot/audio/render.hpp"

namespace earshot::feat {

inline constexpr int kCorrLags = 31;      // lags -15..+15
inline constexpr int kCorrMaxLag = 15;
inline constexpr int kCorrWindows = 16;   // 16 windows of 125 samples
inline constexpr int kCorrWindowLen = kSamplesPerFrame / kCorrWindows;

// Normalized cross-correlation between channel pairs.
// Row layout: pair-major, (i<j) lexicographic, 31 lag rows per pair; one
// column per 125-sample window. Positive lag means channel j lags channel i.
// A single-channel frame degenerates to the (0,0) autocorrelation pair.
struct CorrelationMap {
  int pairs = 0;
  int rows = 0;  // pairs * kCorrLags
  int cols = kCorrWindows;
  std::vector<float> values;  // row-major

  float at(int pair, int lag, int window) const {
    return values[static_cast<size_t>((pair * kCorrLags + (lag + kCorrMaxLag)) * cols + window)];
  }
};

CorrelationMap channel_correlation(const audio::AudioFrame& frame);

}  // namespace earshot::feat
