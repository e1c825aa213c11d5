#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "earshot/data/dataset.hpp"
#include "earshot/feat/features.hpp"
#include "earshot/nn/tensor.hpp"

namespace earshot::train {

// One training/eval example: a 24-frame window with 8 stride-3 visual frames.
struct ClipSample {
  nn::Tensor<float> visual;         // [1, 8, 200, 212]
  nn::Tensor<float> audio;          // [planes, 24, 200, 212]
  nn::Tensor<uint8_t> labels;       // [8, 200, 212]
  nn::Tensor<uint8_t> speaker_mask; // [8, 200, 212]
  std::vector<sim::FrameAnnotation> vis_frames;  // the 8 annotated frames
  uint64_t scene_seed = 0;
  int t0 = 0;
};

ClipSample featurize_clip(const sim::Scene& scene,
                          const std::vector<sim::FrameAnnotation>& annotations,
                          const std::vector<audio::AudioFrame>& audio_frames, int t0,
                          const feat::FeaturizeConfig& cfg);

// Clip index over a dataset directory with an in-memory half-precision
// feature cache (audio features dominate, ~6 MB per clip at f16).
class ClipDataset {
 public:
  ClipDataset(std::string dataset_dir, feat::FeaturizeConfig cfg, int clip_hop = kClipFrames);

  int64_t size() const { return static_cast<int64_t>(clips_.size()); }
  const data::Manifest& manifest() const { return manifest_; }
  const feat::FeaturizeConfig& featurize_config() const { return cfg_; }

  // Featurizes (or fetches) one clip. Thread-compatible for distinct ids
  // when the cache is pre-populated via warm().
  ClipSample get(int64_t clip_id) const;
  void warm();          // featurize everything into the cache up front
  void drop_cache();

  struct ClipRef {
    int scene_index;
    uint64_t scene_seed;
    int t0;
  };
  const std::vector<ClipRef>& clips() const { return clips_; }
  const data::SceneData& scene_data(int scene_index) const;

 private:
  struct CachedClip {
    std::vector<uint16_t> visual, audio;  // f16
    nn::Tensor<uint8_t> labels, speaker_mask;
  };
  ClipSample build(int64_t clip_id) const;
  void store(int64_t clip_id, const ClipSample& sample) const;

  std::string dir_;
  feat::FeaturizeConfig cfg_;
  data::Manifest manifest_;
  mutable std::vector<std::unique_ptr<data::SceneData>> scenes_;
  mutable std::vector<std::unique_ptr<CachedClip>> cache_;
  std::vector<ClipRef> clips_;
};

// Stacks clips into batch tensors. Visual/audio pointers follow the variant
// needs: pass what the model consumes.
struct Batch {
  nn::Tensor<float> visual;  // [N,1,8,H,W]
  nn::Tensor<float> audio;   // [N,planes,24,H,W]
  nn::Tensor<uint8_t> labels;        // [N,8,H,W]
  nn::Tensor<uint8_t> speaker_mask;  // [N,8,H,W]
};

Batch make_batch(const std::vector<ClipSample>& clips, bool need_visual, bool need_audio);

}  // namespace earshot::train
