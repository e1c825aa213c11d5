#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "earshot/core/common.hpp"
#include "earshot/core/geom.hpp"

namespace earshot::sim {

struct Participant {
  int id = 0;
  int seat = 0;           // 0 is always the wearer seat
  Vec3 position;          // head center, table frame, meters
  double head_radius = 0.1;
  int group_id = 0;       // 0 = wearer's conversation group
  double pitch_base = 160.0;  // Hz
  bool is_wearer = false;
};

struct Layout {
  std::string name;
  char family = 'A';                 // A: contiguous groups, B: cross-talk
  std::array<int, 5> seat_groups{};  // group id per seat
};

struct Interval {
  double t0 = 0, t1 = 0;
};

// Speaking intervals per participant, aligned with Scene::participants.
using SpeechSchedule = std::vector<std::vector<Interval>>;

struct WearerPose {
  std::vector<float> yaw;    // rad, one per frame
  std::vector<float> pitch;  // rad
};

struct SimConfig {
  double duration_s = 12.0;
  double layout_mix_a = 2.0 / 3.0;
  std::string layout_name;  // empty: sample family by mix, then uniform

  // Turn taking.
  double turn_mean_s = 4.0;
  double gap_mean_s = 0.8;
  double overlap_prob = 0.1;
  double max_overlap_frac = 0.35;  // cap on within-group simultaneous speech

  // Wearer gaze dynamics. The rate cap is saccade-scale; smooth pursuit is
  // governed by the gain, the cap only bounds FOV-keeping corrections.
  double reaction_lag_s = 0.3;
  double yaw_noise_deg = 3.0;
  double max_yaw_rate_deg_s = 800.0;
  double pursuit_gain = 0.15;  // per-frame first-order gain
  double glance_rate_hz = 0.05;
  double glance_dur_s = 0.5;

  // Table geometry.
  double table_radius_m = 0.95;
  double wearer_radial_frac = 0.52;
  double head_height_m = 1.25;

  // Participant identity pool; train/test splits use disjoint ranges.
  int pool_lo = 0;
  int pool_hi = 1000;
};

struct Scene {
  uint64_t seed = 0;
  SimConfig config;
  Layout layout;
  std::vector<Participant> participants;  // index 0 is the wearer
  SpeechSchedule schedule;                // aligned with participants
  WearerPose pose;
  double duration_s = 0;
  int fps = kFps;

  int frame_count() const { return static_cast<int>(pose.yaw.size()); }
  const Participant& wearer() const { return participants[0]; }

  bool speaking_at(size_t pi, double t) const {
    for (const auto& iv : schedule[pi]) {
      if (t >= iv.t0 && t < iv.t1) return true;
    }
    return false;
  }
};

struct PersonBox {
  int person_id = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // pixels, x in [0,212], y in [0,200]
  bool speaking = false;
  bool in_wearer_group = false;
  bool attended = false;
  float envelope = 0.f;   // speech amplitude envelope at this frame
  float distance_m = 0.f; // to the wearer head
};

struct FrameAnnotation {
  int frame_index = 0;
  bool wearer_speaking = false;
  std::vector<PersonBox> persons;  // visible heads only
};

}  // namespace earshot::sim
