#pragma once

#include <optional>
#include <string>
#include <vector>

#include "earshot/audio/render.hpp"
#include "earshot/sim/scene.hpp"

namespace earshot::data {

struct DatasetConfig {
  std::string out_dir;
  int n_scenes = 8;
  uint64_t seed = 1;             // scene seeds are seed, seed+1, ...
  int audio_channels = 6;
  sim::SimConfig sim;
  audio::RenderConfig render;

  std::string hash() const;
};

struct SceneStats {
  double mean_speakers_per_frame = 0;
  double mean_visible_heads = 0;
  double frames_with_target_frac = 0;       // frames with >= 1 attended person
  double frames_out_of_group_frac = 0;      // frames with a visible non-group speaker
};

struct SceneEntry {
  uint64_t seed = 0;
  std::string dir;          // relative to dataset root
  std::string layout;
  std::string meta_hash;
  std::string annotations_hash;
  std::string audio_hash;
  SceneStats stats;
};

struct Manifest {
  int version = 1;
  std::string config_hash;
  int audio_channels = 6;
  int pool_lo = 0, pool_hi = 0;
  double layout_mix_a = 0;
  std::vector<SceneEntry> scenes;
  SceneStats aggregate;
  std::string dataset_hash;  // over scene content hashes, in order
};

// Generates scenes+audio+annotations under cfg.out_dir and writes
// manifest.json. Fails if the directory exists unless force is set.
Manifest generate_dataset(const DatasetConfig& cfg, bool force, int workers);

Manifest read_manifest(const std::string& dataset_dir);

// Loaded scene with its annotations; audio frames are read lazily.
struct SceneData {
  sim::Scene scene;
  std::vector<sim::FrameAnnotation> annotations;
  std::string audio_path;

  std::vector<audio::AudioFrame> load_audio() const;
};

SceneData read_scene(const std::string& dataset_dir, const SceneEntry& entry);

std::vector<sim::FrameAnnotation> annotate_scene(const sim::Scene& scene);

std::string annotations_to_json(const std::vector<sim::FrameAnnotation>& annotations);
std::vector<sim::FrameAnnotation> annotations_from_json(const std::string& text);

// Train/test hygiene: participant pools and scene seeds must not overlap.
void assert_disjoint(const Manifest& a, const Manifest& b);

}  // namespace earshot::data
