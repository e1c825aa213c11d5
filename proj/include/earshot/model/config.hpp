#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "earshot/core/common.hpp"
#include "earshot/core/hash.hpp"

namespace earshot::model {

enum class Profile { Paper, Tiny };

enum class Variant {
  VisualOnly,
  VisualOnlyTf,
  AudioOnly,
  AudioOnlyTf,
  Audiovisual,             // fusion, no transformer
  AudiovisualTf,           // full model, spatially aligned tokens
  AudiovisualTfNonaligned  // per-modality token sequences, joint attention
};

inline const char* to_string(Profile p) { return p == Profile::Paper ? "paper" : "tiny"; }

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::VisualOnly: return "visual_only";
    case Variant::VisualOnlyTf: return "visual_only_tf";
    case Variant::AudioOnly: return "audio_only";
    case Variant::AudioOnlyTf: return "audio_only_tf";
    case Variant::Audiovisual: return "audiovisual";
    case Variant::AudiovisualTf: return "audiovisual_tf";
    case Variant::AudiovisualTfNonaligned: return "audiovisual_tf_nonaligned";
  }
  return "?";
}

Profile profile_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);

inline bool variant_has_visual(Variant v) {
  return v != Variant::AudioOnly && v != Variant::AudioOnlyTf;
}
inline bool variant_has_audio(Variant v) {
  return v != Variant::VisualOnly && v != Variant::VisualOnlyTf;
}
inline bool variant_has_transformer(Variant v) {
  return v == Variant::VisualOnlyTf || v == Variant::AudioOnlyTf ||
         v == Variant::AudiovisualTf || v == Variant::AudiovisualTfNonaligned;
}
inline bool variant_nonaligned(Variant v) { return v == Variant::AudiovisualTfNonaligned; }

struct ModelConfig {
  Profile profile = Profile::Paper;
  Variant variant = Variant::AudiovisualTf;
  int audio_in_channels = 3;  // 3 stacked planes, or 2n+1 with the alt layout

  // Architecture knobs derived from the profile.
  struct Arch {
    std::vector<int64_t> enc_widths;      // per-stage channels
    int blocks_per_stage;
    int stem_hw_stride;
    std::array<int, 3> stage4_stride;
    int64_t token_dim;                    // D
    int tf_blocks;
    int tf_heads;
    std::vector<int64_t> dec_widths;      // 4 transpose-conv output widths
    std::array<int, 3> dec4_kernel;
  };

  Arch arch() const {
    if (profile == Profile::Paper) {
      return {{64, 128, 256, 512}, 2, 2, {2, 2, 2}, 512, 12, 8, {256, 128, 64, 32}, {3, 4, 4}};
    }
    return {{8, 16, 32, 64}, 1, 4, {2, 1, 1}, 128, 4, 4, {64, 32, 12, 6}, {3, 3, 3}};
  }

  int64_t encoder_channels() const { return arch().enc_widths.back(); }

  std::string hash() const {
    Fnv1a h;
    h.update(std::string("model/v1|"));
    h.update(std::string(to_string(profile)) + "|" + to_string(variant) + "|" +
             std::to_string(audio_in_channels));
    return h.hex();
  }
};

}  // namespace earshot::model
