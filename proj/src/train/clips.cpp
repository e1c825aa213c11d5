#include "earshot/train/clips.hpp"

#include <cmath>
#include <cstring>

#include "earshot/core/f16.hpp"
#include "earshot/core/threading.hpp"
#include "earshot/sim/face_render.hpp"
#include "earshot/sim/projection.hpp"

namespace earshot::train {

ClipSample featurize_clip(const sim::Scene& scene,
                          const std::vector<sim::FrameAnnotation>& annotations,
                          const std::vector<audio::AudioFrame>& audio_frames, int t0,
                          const feat::FeaturizeConfig& cfg) {
  if (t0 + kClipFrames > static_cast<int>(annotations.size())) {
    throw std::invalid_argument("featurize_clip: window exceeds scene");
  }
  ClipSample out;
  out.scene_seed = scene.seed;
  out.t0 = t0;

  std::vector<std::vector<uint8_t>> images(kVisFrames);
  for (int k = 0; k < kVisFrames; ++k) {
    const auto& ann = annotations[static_cast<size_t>(t0 + k * kVisStride)];
    out.vis_frames.push_back(ann);
    if (cfg.visual_mode != feat::VisualMode::Bbox) {
      images[static_cast<size_t>(k)].resize(static_cast<size_t>(kImageH) * kImageW);
      sim::render_frame_image(ann, scene.seed, images[static_cast<size_t>(k)].data());
    }
  }
  out.visual = feat::visual_input(images, out.vis_frames, cfg.visual_mode);

  std::vector<audio::AudioFrame> window(audio_frames.begin() + t0,
                                        audio_frames.begin() + t0 + kClipFrames);
  out.audio = feat::audio_input(window, cfg);

  out.labels.resize({kVisFrames, kImageH, kImageW});
  out.speaker_mask.resize({kVisFrames, kImageH, kImageW});
  for (int k = 0; k < kVisFrames; ++k) {
    sim::label_heatmap(out.vis_frames[static_cast<size_t>(k)],
                       out.labels.data() + static_cast<int64_t>(k) * kImageH * kImageW);
    sim::speaker_mask(out.vis_frames[static_cast<size_t>(k)],
                      out.speaker_mask.data() + static_cast<int64_t>(k) * kImageH * kImageW);
  }
  return out;
}

ClipDataset::ClipDataset(std::string dataset_dir, feat::FeaturizeConfig cfg, int clip_hop)
    : dir_(std::move(dataset_dir)), cfg_(cfg), manifest_(data::read_manifest(dir_)) {
  scenes_.resize(manifest_.scenes.size());
  for (size_t si = 0; si < manifest_.scenes.size(); ++si) {
    const data::SceneData& sd = scene_data(static_cast<int>(si));
    const int total = sd.scene.frame_count();
    for (int t0 = 0; t0 + kClipFrames <= total; t0 += clip_hop) {
      clips_.push_back({static_cast<int>(si), manifest_.scenes[si].seed, t0});
    }
  }
  cache_.resize(clips_.size());
}

const data::SceneData& ClipDataset::scene_data(int scene_index) const {
  auto& slot = scenes_[static_cast<size_t>(scene_index)];
  if (!slot) {
    slot = std::make_unique<data::SceneData>(
        data::read_scene(dir_, manifest_.scenes[static_cast<size_t>(scene_index)]));
  }
  return *slot;
}

void ClipDataset::store(int64_t clip_id, const ClipSample& sample) const {
  auto cached = std::make_unique<CachedClip>();
  cached->visual.resize(static_cast<size_t>(sample.visual.numel()));
  for (int64_t i = 0; i < sample.visual.numel(); ++i) {
    cached->visual[static_cast<size_t>(i)] = float_to_half(sample.visual[i]);
  }
  cached->audio.resize(static_cast<size_t>(sample.audio.numel()));
  for (int64_t i = 0; i < sample.audio.numel(); ++i) {
    cached->audio[static_cast<size_t>(i)] = float_to_half(sample.audio[i]);
  }
  cached->labels = sample.labels;
  cached->speaker_mask = sample.speaker_mask;
  cache_[static_cast<size_t>(clip_id)] = std::move(cached);
}

ClipSample ClipDataset::build(int64_t clip_id) const {
  const ClipRef& ref = clips_[static_cast<size_t>(clip_id)];
  const data::SceneData& sd = scene_data(ref.scene_index);
  const auto audio_frames = sd.load_audio();
  return featurize_clip(sd.scene, sd.annotations, audio_frames, ref.t0, cfg_);
}

ClipSample ClipDataset::get(int64_t clip_id) const {
  const auto& slot = cache_[static_cast<size_t>(clip_id)];
  if (!slot) {
    ClipSample sample = build(clip_id);
    store(clip_id, sample);
    return sample;
  }
  const ClipRef& ref = clips_[static_cast<size_t>(clip_id)];
  const data::SceneData& sd = scene_data(ref.scene_index);
  ClipSample out;
  out.scene_seed = ref.scene_seed;
  out.t0 = ref.t0;
  for (int k = 0; k < kVisFrames; ++k) {
    out.vis_frames.push_back(sd.annotations[static_cast<size_t>(ref.t0 + k * kVisStride)]);
  }
  out.visual.resize({1, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < out.visual.numel(); ++i) {
    out.visual[i] = half_to_float(slot->visual[static_cast<size_t>(i)]);
  }
  const int planes = cfg_.audio_planes(manifest_.audio_channels);
  out.audio.resize({planes, kClipFrames, kImageH, kImageW});
  for (int64_t i = 0; i < out.audio.numel(); ++i) {
    out.audio[i] = half_to_float(slot->audio[static_cast<size_t>(i)]);
  }
  out.labels = slot->labels;
  out.speaker_mask = slot->speaker_mask;
  return out;
}

void ClipDataset::warm() {
  // One scene at a time so the raw audio is decoded once and released.
  for (size_t si = 0; si < manifest_.scenes.size(); ++si) {
    const data::SceneData& sd = scene_data(static_cast<int>(si));
    std::vector<audio::AudioFrame> audio_frames;
    bool loaded = false;
    for (int64_t clip_id = 0; clip_id < size(); ++clip_id) {
      const ClipRef& ref = clips_[static_cast<size_t>(clip_id)];
      if (ref.scene_index != static_cast<int>(si) || cache_[static_cast<size_t>(clip_id)]) {
        continue;
      }
      if (!loaded) {
        audio_frames = sd.load_audio();
        loaded = true;
      }
      store(clip_id, featurize_clip(sd.scene, sd.annotations, audio_frames, ref.t0, cfg_));
    }
  }
}

void ClipDataset::drop_cache() {
  for (auto& c : cache_) c.reset();
}

Batch make_batch(const std::vector<ClipSample>& clips, bool need_visual, bool need_audio) {
  const int64_t n = static_cast<int64_t>(clips.size());
  Batch b;
  if (need_visual) b.visual.resize({n, 1, kVisFrames, kImageH, kImageW});
  if (need_audio) b.audio.resize({n, clips[0].audio.dim(0), kClipFrames, kImageH, kImageW});
  b.labels.resize({n, kVisFrames, kImageH, kImageW});
  b.speaker_mask.resize({n, kVisFrames, kImageH, kImageW});
  for (int64_t i = 0; i < n; ++i) {
    const ClipSample& c = clips[static_cast<size_t>(i)];
    if (need_visual) {
      std::memcpy(b.visual.data() + i * c.visual.numel(), c.visual.data(),
                  static_cast<size_t>(c.visual.numel()) * sizeof(float));
    }
    if (need_audio) {
      std::memcpy(b.audio.data() + i * c.audio.numel(), c.audio.data(),
                  static_cast<size_t>(c.audio.numel()) * sizeof(float));
    }
    std::memcpy(b.labels.data() + i * c.labels.numel(), c.labels.data(),
                static_cast<size_t>(c.labels.numel()));
    std::memcpy(b.speaker_mask.data() + i * c.speaker_mask.numel(), c.speaker_mask.data(),
                static_cast<size_t>(c.speaker_mask.numel()));
  }
  return b;
}

}  // namespace earshot::train
