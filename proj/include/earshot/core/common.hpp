#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace earshot {

// Fixed pipeline geometry. The camera delivers 200x212 grayscale frames at
// 30 fps; audio is blocked into 2000-sample frames so that one audio frame
// covers exactly one video frame at 60 kHz.
inline constexpr int kImageH = 200;
inline constexpr int kImageW = 212;
inline constexpr int kFps = 30;
inline constexpr int kSampleRate = 60000;
inline constexpr int kSamplesPerFrame = kSampleRate / kFps;  // 2000
inline constexpr int kClipFrames = 24;    // audio frames per clip
inline constexpr int kVisFrames = 8;      // visual frames per clip
inline constexpr int kVisStride = 3;      // kVisFrames * kVisStride == kClipFrames
inline constexpr double kSpeedOfSound = 343.0;  // m/s

static_assert(kVisFrames * kVisStride == kClipFrames);
static_assert(kSamplesPerFrame == 2000);

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct HashMismatchError : std::runtime_error {
  explicit HashMismatchError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace earshot
