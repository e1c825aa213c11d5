#include "earshot/sim/scene.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "earshot/core/rng.hpp"

namespace earshot::sim {

using json = nlohmann::json;

namespace {

constexpr uint64_t kTagLayout = 0x6c61796f7574ull;
constexpr uint64_t kTagPeople = 0x70656f706c65ull;
constexpr uint64_t kTagSchedule = 0x7363686564ull;
constexpr uint64_t kTagPose = 0x706f7365ull;
constexpr uint64_t kTagTraits = 0x747261697473ull;
constexpr uint64_t kTagEnvelope = 0x656e76ull;

// Seat angles around the table, wearer at the southern seat looking north.
constexpr double kSeatAngleDeg[5] = {-90.0, -18.0, 54.0, 126.0, 198.0};

}  // namespace

const std::vector<Layout>& builtin_layouts() {
  static const std::vector<Layout> layouts = {
      {"A1", 'A', {0, 0, 0, 1, 1}},  // wearer with the two right-side seats
      {"A2", 'A', {0, 1, 1, 0, 0}},  // wearer with the two left-side seats
      {"A3", 'A', {0, 0, 1, 1, 1}},  // wearer pair on the right, trio left
      {"B1", 'B', {0, 1, 0, 1, 0}},  // alternating
      {"B2", 'B', {0, 0, 1, 0, 1}},  // wearer group split around seat 2
  };
  return layouts;
}

const Layout& layout_by_name(const std::string& name) {
  for (const auto& l : builtin_layouts()) {
    if (l.name == name) return l;
  }
  throw ConfigError("unknown layout name: " + name);
}

namespace {

Layout pick_layout(const SimConfig& cfg, Rng& rng) {
  if (!cfg.layout_name.empty()) return layout_by_name(cfg.layout_name);
  const char family = rng.uniform() < cfg.layout_mix_a ? 'A' : 'B';
  std::vector<const Layout*> candidates;
  for (const auto& l : builtin_layouts()) {
    if (l.family == family) candidates.push_back(&l);
  }
  return *candidates[rng.uniform_int(candidates.size())];
}

std::vector<Participant> make_participants(const SimConfig& cfg, const Layout& layout, Rng& rng) {
  if (cfg.pool_hi - cfg.pool_lo < 5) throw ConfigError("participant pool smaller than 5");
  std::set<int> chosen;
  std::vector<int> ids;
  while (ids.size() < 5) {
    int id = cfg.pool_lo + static_cast<int>(rng.uniform_int(
                               static_cast<uint64_t>(cfg.pool_hi - cfg.pool_lo)));
    if (chosen.insert(id).second) ids.push_back(id);
  }
  rng.shuffle(ids);

  std::vector<Participant> out;
  for (int seat = 0; seat < 5; ++seat) {
    Participant p;
    p.id = ids[static_cast<size_t>(seat)];
    p.seat = seat;
    p.group_id = layout.seat_groups[static_cast<size_t>(seat)];
    p.is_wearer = seat == 0;
    // Identity traits derive from the id alone, so the same participant
    // sounds and looks the same in every scene.
    Rng traits(derive_seed(kTagTraits, static_cast<uint64_t>(p.id)));
    p.pitch_base = traits.uniform(105.0, 265.0);
    p.head_radius = traits.uniform(0.085, 0.115);
    const double z_jitter = traits.uniform(-0.04, 0.04);
    const double ang = deg2rad(kSeatAngleDeg[seat]);
    const double r = seat == 0 ? cfg.table_radius_m * cfg.wearer_radial_frac : cfg.table_radius_m;
    p.position = {r * std::cos(ang), r * std::sin(ang), cfg.head_height_m + z_jitter};
    out.push_back(p);
  }
  return out;
}

// Semi-Markov alternating turns inside one group. Overlap is budgeted so the
// within-group simultaneous fraction stays under the configured cap.
void schedule_group(const SimConfig& cfg, const std::vector<size_t>& members, Rng& rng,
                    SpeechSchedule& schedule) {
  if (members.empty()) return;
  double overlap_budget = cfg.max_overlap_frac * cfg.duration_s;
  double overlap_used = 0;
  double cursor = rng.exponential(0.6);  // initial silence
  size_t prev = members.size();
  while (cursor < cfg.duration_s) {
    size_t who;
    do {
      who = members[rng.uniform_int(members.size())];
    } while (members.size() > 1 && who == prev);
    double turn = std::clamp(rng.exponential(cfg.turn_mean_s), 0.8, 12.0);
    double t0 = cursor;
    double t1 = std::min(t0 + turn, cfg.duration_s);
    // Keep a participant's own intervals disjoint.
    if (!schedule[who].empty()) {
      t0 = std::max(t0, schedule[who].back().t1 + 0.05);
    }
    if (t1 - t0 >= 0.15) {
      schedule[who].push_back({t0, t1});
    }
    prev = who;
    const bool overlap = rng.bernoulli(cfg.overlap_prob);
    if (overlap && overlap_used < overlap_budget && members.size() > 1) {
      double back = rng.uniform(0.2, 1.5);
      back = std::min(back, t1 - t0 > 0 ? (t1 - t0) * 0.8 : 0.0);
      overlap_used += back;
      cursor = t1 - back;
    } else {
      cursor = t1 + rng.exponential(cfg.gap_mean_s);
    }
  }
}

SpeechSchedule make_schedule(const SimConfig& cfg, const std::vector<Participant>& people,
                             Rng& rng) {
  SpeechSchedule schedule(people.size());
  for (int g = 0; g < 2; ++g) {
    std::vector<size_t> members;
    for (size_t i = 0; i < people.size(); ++i) {
      if (people[i].group_id == g) members.push_back(i);
    }
    schedule_group(cfg, members, rng, schedule);
  }
  return schedule;
}

struct SeatView {
  double azimuth;    // world compass angle from the wearer head
  double elevation;
};

std::vector<SeatView> seat_views(const std::vector<Participant>& people) {
  std::vector<SeatView> views(people.size());
  const Vec3 w = people[0].position;
  for (size_t i = 1; i < people.size(); ++i) {
    const Vec3 d = people[i].position - w;
    views[i].azimuth = std::atan2(d.x, d.y);
    views[i].elevation = std::atan2(d.z, std::sqrt(d.x * d.x + d.y * d.y));
  }
  return views;
}

WearerPose make_pose(const SimConfig& cfg, const std::vector<Participant>& people,
                     const SpeechSchedule& schedule, Rng& rng) {
  const int frames = static_cast<int>(std::lround(cfg.duration_s * kFps));
  const auto views = seat_views(people);
  WearerPose pose;
  pose.yaw.resize(static_cast<size_t>(frames));
  pose.pitch.resize(static_cast<size_t>(frames));

  auto ingroup_speakers = [&](double t0, double t1) {
    std::vector<size_t> out;
    for (size_t i = 1; i < people.size(); ++i) {
      if (people[i].group_id != 0) continue;
      for (const auto& iv : schedule[i]) {
        if (iv.t0 < t1 && iv.t1 > t0) {
          out.push_back(i);
          break;
        }
      }
    }
    return out;
  };
  // Azimuth window keeping every listed person within +-88 deg of the gaze.
  auto fov_window = [&](const std::vector<size_t>& who, double& lo, double& hi) {
    lo = -M_PI;
    hi = M_PI;
    for (size_t i : who) {
      lo = std::max(lo, views[i].azimuth - deg2rad(88.0));
      hi = std::min(hi, views[i].azimuth + deg2rad(88.0));
    }
  };

  const double sigma = deg2rad(cfg.yaw_noise_deg);
  const double max_step = deg2rad(cfg.max_yaw_rate_deg_s) / kFps;
  double yaw = 0, pitch = 0;
  double hold_az = 0, hold_el = 0;
  int glance_left = 0;
  double glance_az = 0, glance_el = 0;

  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / kFps;
    // Pursuit target: centroid of in-group speakers, seen with reaction lag.
    const double t_lag = std::max(0.0, t - cfg.reaction_lag_s);
    const auto lagged = ingroup_speakers(t_lag, t_lag + 1e-9);
    if (!lagged.empty()) {
      double az = 0, el = 0;
      for (size_t i : lagged) {
        az += views[i].azimuth;
        el += views[i].elevation;
      }
      hold_az = az / static_cast<double>(lagged.size());
      hold_el = el / static_cast<double>(lagged.size());
    }
    if (glance_left == 0 && rng.bernoulli(cfg.glance_rate_hz / kFps)) {
      const size_t pick = 1 + rng.uniform_int(people.size() - 1);
      glance_az = views[pick].azimuth;
      glance_el = views[pick].elevation;
      // Keep the glance compatible with the FOV constraint over its whole
      // duration, so resuming pursuit never needs a jump.
      double lo, hi;
      fov_window(ingroup_speakers(t, t + cfg.glance_dur_s + cfg.reaction_lag_s), lo, hi);
      if (lo <= hi) glance_az = std::clamp(glance_az, lo, hi);
      glance_left = static_cast<int>(std::lround(cfg.glance_dur_s * kFps));
    }
    double target_az = (glance_left > 0 ? glance_az : hold_az) + rng.normal(0.0, sigma);
    double target_el = (glance_left > 0 ? glance_el : hold_el) + rng.normal(0.0, sigma / 3);
    if (glance_left > 0) --glance_left;

    yaw += std::clamp(cfg.pursuit_gain * wrap_angle(target_az - yaw), -max_step, max_step);
    pitch += std::clamp(cfg.pursuit_gain * wrap_angle(target_el - pitch), -max_step, max_step);
    pitch = std::clamp(pitch, deg2rad(-20.0), deg2rad(20.0));

    // Hard field-of-view guarantee: every currently attended person stays
    // inside +-90 deg of the gaze (with margin).
    double lo, hi;
    fov_window(ingroup_speakers(t, t + 1e-9), lo, hi);
    if (lo <= hi) yaw = std::clamp(yaw, lo, hi);
    pose.yaw[static_cast<size_t>(f)] = static_cast<float>(yaw);
    pose.pitch[static_cast<size_t>(f)] = static_cast<float>(pitch);
  }
  return pose;
}

}  // namespace

Scene generate_scene(const SimConfig& cfg, uint64_t seed) {
  if (cfg.duration_s < 0.8) throw ConfigError("scene duration must be >= 0.8 s");
  Scene scene;
  scene.seed = seed;
  scene.config = cfg;
  scene.duration_s = cfg.duration_s;
  scene.fps = kFps;

  Rng rng_layout(derive_seed(seed, kTagLayout));
  scene.layout = pick_layout(cfg, rng_layout);

  Rng rng_people(derive_seed(seed, kTagPeople));
  scene.participants = make_participants(cfg, scene.layout, rng_people);

  Rng rng_schedule(derive_seed(seed, kTagSchedule));
  scene.schedule = make_schedule(cfg, scene.participants, rng_schedule);

  Rng rng_pose(derive_seed(seed, kTagPose));
  scene.pose = make_pose(cfg, scene.participants, scene.schedule, rng_pose);
  return scene;
}

EnvelopeParams envelope_params(const Scene& scene, size_t pi, size_t k) {
  Rng rng(derive_seed(scene.seed, kTagEnvelope, static_cast<uint64_t>(scene.participants[pi].id),
                      k));
  EnvelopeParams p;
  p.am_hz = rng.uniform(3.0, 8.0);
  p.phase = rng.uniform(0.0, 2 * M_PI);
  return p;
}

double envelope_value(const Interval& iv, const EnvelopeParams& p, double t) {
  if (t < iv.t0 || t >= iv.t1) return 0.0;
  const double rel = t - iv.t0;
  const double env = 0.55 + 0.45 * std::sin(2 * M_PI * p.am_hz * rel + p.phase);
  const double ramp = std::min({1.0, rel / 0.06, (iv.t1 - t) / 0.06});
  return std::max(0.0, env * std::max(0.0, ramp));
}

double envelope_at(const Scene& scene, size_t pi, double t) {
  const auto& intervals = scene.schedule[pi];
  for (size_t k = 0; k < intervals.size(); ++k) {
    if (t >= intervals[k].t0 && t < intervals[k].t1) {
      return envelope_value(intervals[k], envelope_params(scene, pi, k), t);
    }
  }
  return 0.0;
}

double within_group_overlap_fraction(const Scene& scene, int group) {
  const int frames = scene.frame_count();
  int overlap = 0;
  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / kFps;
    int n = 0;
    for (size_t i = 0; i < scene.participants.size(); ++i) {
      if (scene.participants[i].group_id == group && scene.speaking_at(i, t)) ++n;
    }
    if (n >= 2) ++overlap;
  }
  return frames > 0 ? static_cast<double>(overlap) / frames : 0.0;
}

double mean_speakers_per_frame(const Scene& scene) {
  const int frames = scene.frame_count();
  int64_t total = 0;
  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / kFps;
    for (size_t i = 1; i < scene.participants.size(); ++i) {
      if (scene.speaking_at(i, t)) ++total;
    }
  }
  return frames > 0 ? static_cast<double>(total) / frames : 0.0;
}

namespace {

json config_to_json(const SimConfig& c) {
  return json{{"duration_s", c.duration_s},
              {"layout_mix_a", c.layout_mix_a},
              {"layout_name", c.layout_name},
              {"turn_mean_s", c.turn_mean_s},
              {"gap_mean_s", c.gap_mean_s},
              {"overlap_prob", c.overlap_prob},
              {"max_overlap_frac", c.max_overlap_frac},
              {"reaction_lag_s", c.reaction_lag_s},
              {"yaw_noise_deg", c.yaw_noise_deg},
              {"max_yaw_rate_deg_s", c.max_yaw_rate_deg_s},
              {"pursuit_gain", c.pursuit_gain},
              {"glance_rate_hz", c.glance_rate_hz},
              {"glance_dur_s", c.glance_dur_s},
              {"table_radius_m", c.table_radius_m},
              {"wearer_radial_frac", c.wearer_radial_frac},
              {"head_height_m", c.head_height_m},
              {"pool_lo", c.pool_lo},
              {"pool_hi", c.pool_hi}};
}

SimConfig config_from_json(const json& j) {
  SimConfig c;
  c.duration_s = j.at("duration_s");
  c.layout_mix_a = j.at("layout_mix_a");
  c.layout_name = j.at("layout_name");
  c.turn_mean_s = j.at("turn_mean_s");
  c.gap_mean_s = j.at("gap_mean_s");
  c.overlap_prob = j.at("overlap_prob");
  c.max_overlap_frac = j.at("max_overlap_frac");
  c.reaction_lag_s = j.at("reaction_lag_s");
  c.yaw_noise_deg = j.at("yaw_noise_deg");
  c.max_yaw_rate_deg_s = j.at("max_yaw_rate_deg_s");
  c.pursuit_gain = j.at("pursuit_gain");
  c.glance_rate_hz = j.at("glance_rate_hz");
  c.glance_dur_s = j.at("glance_dur_s");
  c.table_radius_m = j.at("table_radius_m");
  c.wearer_radial_frac = j.at("wearer_radial_frac");
  c.head_height_m = j.at("head_height_m");
  c.pool_lo = j.at("pool_lo");
  c.pool_hi = j.at("pool_hi");
  return c;
}

}  // namespace

std::string serialize_scene(const Scene& s) {
  json j;
  j["version"] = 1;
  j["seed"] = s.seed;
  j["config"] = config_to_json(s.config);
  j["duration_s"] = s.duration_s;
  j["fps"] = s.fps;
  j["layout"] = {{"name", s.layout.name},
                 {"family", std::string(1, s.layout.family)},
                 {"seat_groups", s.layout.seat_groups}};
  json people = json::array();
  for (const auto& p : s.participants) {
    people.push_back({{"id", p.id},
                      {"seat", p.seat},
                      {"position", {p.position.x, p.position.y, p.position.z}},
                      {"head_radius", p.head_radius},
                      {"group", p.group_id},
                      {"pitch_base", p.pitch_base},
                      {"is_wearer", p.is_wearer}});
  }
  j["participants"] = people;
  json sched = json::array();
  for (const auto& ivs : s.schedule) {
    json arr = json::array();
    for (const auto& iv : ivs) arr.push_back({iv.t0, iv.t1});
    sched.push_back(arr);
  }
  j["schedule"] = sched;
  j["pose"] = {{"yaw", s.pose.yaw}, {"pitch", s.pose.pitch}};
  return j.dump();
}

Scene parse_scene(const std::string& text) {
  const json j = json::parse(text);
  Scene s;
  s.seed = j.at("seed");
  s.config = config_from_json(j.at("config"));
  s.duration_s = j.at("duration_s");
  s.fps = j.at("fps");
  s.layout.name = j.at("layout").at("name");
  s.layout.family = j.at("layout").at("family").get<std::string>()[0];
  for (size_t i = 0; i < 5; ++i) s.layout.seat_groups[i] = j.at("layout").at("seat_groups")[i];
  for (const auto& pj : j.at("participants")) {
    Participant p;
    p.id = pj.at("id");
    p.seat = pj.at("seat");
    p.position = {pj.at("position")[0], pj.at("position")[1], pj.at("position")[2]};
    p.head_radius = pj.at("head_radius");
    p.group_id = pj.at("group");
    p.pitch_base = pj.at("pitch_base");
    p.is_wearer = pj.at("is_wearer");
    s.participants.push_back(p);
  }
  for (const auto& ivs : j.at("schedule")) {
    std::vector<Interval> arr;
    for (const auto& iv : ivs) arr.push_back({iv[0], iv[1]});
    s.schedule.push_back(std::move(arr));
  }
  s.pose.yaw = j.at("pose").at("yaw").get<std::vector<float>>();
  s.pose.pitch = j.at("pose").at("pitch").get<std::vector<float>>();
  return s;
}

}  // namespace earshot::sim
