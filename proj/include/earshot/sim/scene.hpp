#pragma once

#include <string>

#include "earshot/sim/types.hpp"

namespace earshot::sim {

// Built-in seat/group assignments. A* keep each group contiguous around the
// table; B* interleave the groups so conversations cross.
const std::vector<Layout>& builtin_layouts();
const Layout& layout_by_name(const std::string& name);

// Deterministic scene synthesis: identical (config, seed) pairs produce
// byte-identical serializations.
Scene generate_scene(const SimConfig& config, uint64_t seed);

std::string serialize_scene(const Scene& scene);
Scene parse_scene(const std::string& json_text);

// Amplitude-modulation parameters of one speaking interval, derived from
// (scene seed, participant id, interval index).
struct EnvelopeParams {
  double am_hz = 5.0;
  double phase = 0.0;
};
EnvelopeParams envelope_params(const Scene& scene, size_t pi, size_t interval_index);
double envelope_value(const Interval& iv, const EnvelopeParams& p, double t);

// Speech amplitude envelope for participant `pi` at time t (0 when silent).
// Shared by the face renderer (mouth opening) and the voice synthesizer.
double envelope_at(const Scene& scene, size_t pi, double t);

// Fraction of time with >= 2 simultaneous speakers inside one group.
double within_group_overlap_fraction(const Scene& scene, int group);

// Mean number of non-wearer participants speaking per frame.
double mean_speakers_per_frame(const Scene& scene);

}  // namespace earshot::sim
