#pragma once

#include <cstdint>
#include <vector>

#include "earshot/sim/scene.hpp"

namespace earshot::audio {

// Mono source waveform for one participant across the whole scene, nonzero
// only inside their speaking intervals. Synthetic stand-in for speech:
// harmonic stack with a slow pitch contour, 3-8 Hz amplitude modulation and
// interleaved noise bursts as a consonant proxy.
struct SourceSignal {
  int participant_id = 0;
  size_t participant_index = 0;
  std::vector<float> samples;              // scene-long at 60 kHz
  std::vector<float> frame_envelope;       // one value per video frame
};

// Deterministic per (scene seed, participant id, interval index).
void synth_voice_interval(const sim::Scene& scene, size_t pi, size_t interval_index,
                          std::vector<float>& samples);

SourceSignal make_source(const sim::Scene& scene, size_t pi);
std::vector<SourceSignal> make_sources(const sim::Scene& scene);

}  // namespace earshot::audio
