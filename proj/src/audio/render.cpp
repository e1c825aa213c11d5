#include "earshot/audio/render.hpp"

#include <cmath>

#include "earshot/core/rng.hpp"

namespace earshot::audio {

namespace {
constexpr uint64_t kTagNoise = 0x6e6f697365ull;
// Delay margin: a source whose schedule is silent within the frame plus this
// margin cannot contribute (max array delay ~27 samples, sinc tail 16).
constexpr double kActiveMargin = 64.0 / kSampleRate;
}  // namespace

Vec3 source_direction(const sim::Scene& scene, int frame, size_t pi) {
  const Vec3 d = scene.participants[pi].position - scene.wearer().position;
  const double yaw = scene.pose.yaw[static_cast<size_t>(frame)];
  const double pitch = scene.pose.pitch[static_cast<size_t>(frame)];
  return world_to_head(d, yaw, pitch).normalized();
}

AudioFrame render_frame(const sim::Scene& scene, const std::vector<SourceSignal>& sources,
                        int frame, const MicArray& array, const RenderConfig& cfg) {
  AudioFrame out;
  out.channels = array.channels();
  out.samples.assign(static_cast<size_t>(out.channels) * kSamplesPerFrame, 0.f);
  const int64_t block_start = static_cast<int64_t>(frame) * kSamplesPerFrame;
  const double t0 = static_cast<double>(block_start) / kSampleRate;
  const double t1 = t0 + static_cast<double>(kSamplesPerFrame) / kSampleRate;

  for (const auto& src : sources) {
    const size_t pi = src.participant_index;
    bool active = false;
    for (const auto& iv : scene.schedule[pi]) {
      if (iv.t0 < t1 + kActiveMargin && iv.t1 > t0 - kActiveMargin) {
        active = true;
        break;
      }
    }
    if (!active) continue;
    if (pi == 0) {
      // Wearer voice: near field, equal gain, no inter-mic delay.
      const float g = static_cast<float>(cfg.wearer_gain);
      for (int c = 0; c < out.channels; ++c) {
        float* dst = out.channel(c);
        for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
          dst[i] += g * src.samples[static_cast<size_t>(block_start + i)];
        }
      }
    } else {
      const Vec3 dir = source_direction(scene, frame, pi);
      const FarFieldAtf atf = far_field_atf(dir, array);
      apply_atf(atf, src.samples.data(), static_cast<int64_t>(src.samples.size()), block_start,
                kSamplesPerFrame, out.samples.data());
    }
  }

  if (std::isfinite(cfg.snr_db)) {
    const double sigma = cfg.noise_ref_rms * std::pow(10.0, -cfg.snr_db / 20.0);
    for (int c = 0; c < out.channels; ++c) {
      Rng rng(derive_seed(scene.seed, kTagNoise, static_cast<uint64_t>(frame),
                          static_cast<uint64_t>(c)));
      float* dst = out.channel(c);
      for (int64_t i = 0; i < kSamplesPerFrame; ++i) {
        dst[i] += static_cast<float>(rng.normal(0.0, sigma));
      }
    }
  }
  return out;
}

std::vector<AudioFrame> render_scene_audio(const sim::Scene& scene,
                                           const std::vector<SourceSignal>& sources,
                                           const MicArray& array, const RenderConfig& cfg) {
  const int frames = scene.frame_count();
  std::vector<AudioFrame> out(static_cast<size_t>(frames));
#pragma omp parallel for schedule(static)
  for (int f = 0; f < frames; ++f) {
    out[static_cast<size_t>(f)] = render_frame(scene, sources, f, array, cfg);
  }
  return out;
}

}  // namespace earshot::audio
