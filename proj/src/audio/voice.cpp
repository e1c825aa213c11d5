#include "earshot/audio/voice.hpp"

#include <algorithm>
#include <cmath>

#include "earshot/core/rng.hpp"

namespace earshot::audio {

namespace {
constexpr uint64_t kTagVoice = 0x766f696365ull;
constexpr int kHarmonics = 14;
}  // namespace

void synth_voice_interval(const sim::Scene& scene, size_t pi, size_t k,
                          std::vector<float>& samples) {
  const auto& iv = scene.schedule[pi][k];
  const auto& person = scene.participants[pi];
  Rng rng(derive_seed(scene.seed, kTagVoice, static_cast<uint64_t>(person.id), k));

  // Slow pitch contour: +-20% around the base, a few control points.
  const double c0 = rng.uniform(-0.2, 0.2);
  const double c1 = rng.uniform(-0.2, 0.2);
  const double c2 = rng.uniform(-0.2, 0.2);
  double harmonic_amp[kHarmonics];
  for (int h = 0; h < kHarmonics; ++h) {
    harmonic_amp[h] = (1.0 / (h + 1)) * rng.uniform(0.7, 1.0);
  }
  const double phase0 = rng.uniform(0.0, 2 * M_PI);

  // Consonant proxy: short noise bursts at quasi-syllabic rate.
  struct Burst {
    double t0, t1, amp;
  };
  std::vector<Burst> bursts;
  double bt = iv.t0 + rng.uniform(0.05, 0.3);
  while (bt < iv.t1 - 0.05) {
    const double len = rng.uniform(0.02, 0.07);
    bursts.push_back({bt, std::min(bt + len, iv.t1), rng.uniform(0.05, 0.14)});
    bt += rng.uniform(0.18, 0.45);
  }
  Rng noise_rng(derive_seed(scene.seed, kTagVoice, static_cast<uint64_t>(person.id), k, 0x6eull));

  const int64_t s0 = static_cast<int64_t>(std::llround(iv.t0 * kSampleRate));
  const int64_t s1 = std::min<int64_t>(static_cast<int64_t>(std::llround(iv.t1 * kSampleRate)),
                                       static_cast<int64_t>(samples.size()));
  const sim::EnvelopeParams env_params = sim::envelope_params(scene, pi, k);
  double phase = phase0;
  size_t burst_idx = 0;
  float prev_noise = 0.f;
  for (int64_t s = s0; s < s1; ++s) {
    const double t = static_cast<double>(s) / kSampleRate;
    const double u = (t - iv.t0) / std::max(1e-9, iv.t1 - iv.t0);
    // Quadratic Bezier through the three contour points.
    const double contour = (1 - u) * (1 - u) * c0 + 2 * u * (1 - u) * c1 + u * u * c2;
    const double f0 = person.pitch_base * (1.0 + contour);
    phase += 2 * M_PI * f0 / kSampleRate;
    if (phase > 2 * M_PI) phase -= 2 * M_PI;
    double v = 0;
    for (int h = 0; h < kHarmonics; ++h) {
      v += harmonic_amp[h] * std::sin(phase * (h + 1));
    }
    v *= 0.12;  // headroom for 14 harmonics

    while (burst_idx < bursts.size() && t >= bursts[burst_idx].t1) ++burst_idx;
    if (burst_idx < bursts.size() && t >= bursts[burst_idx].t0) {
      // One-pole high-passed white noise.
      const float white = static_cast<float>(noise_rng.uniform(-1.0, 1.0));
      const float hp = white - prev_noise;
      prev_noise = white;
      v += bursts[burst_idx].amp * hp;
    }
    samples[static_cast<size_t>(s)] +=
        static_cast<float>(v * sim::envelope_value(iv, env_params, t));
  }
}

SourceSignal make_source(const sim::Scene& scene, size_t pi) {
  SourceSignal src;
  src.participant_id = scene.participants[pi].id;
  src.participant_index = pi;
  const int frames = scene.frame_count();
  src.samples.assign(static_cast<size_t>(frames) * kSamplesPerFrame, 0.f);
  for (size_t k = 0; k < scene.schedule[pi].size(); ++k) {
    synth_voice_interval(scene, pi, k, src.samples);
  }
  src.frame_envelope.resize(static_cast<size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    src.frame_envelope[static_cast<size_t>(f)] =
        static_cast<float>(sim::envelope_at(scene, pi, static_cast<double>(f) / kFps));
  }
  return src;
}

std::vector<SourceSignal> make_sources(const sim::Scene& scene) {
  std::vector<SourceSignal> out;
  for (size_t pi = 0; pi < scene.participants.size(); ++pi) {
    out.push_back(make_source(scene, pi));
  }
  return out;
}

}  // namespace earshot::audio
