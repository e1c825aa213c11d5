#include "earshot/data/dataset.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "earshot/audio/wav.hpp"
#include "earshot/core/hash.hpp"
#include "earshot/sim/projection.hpp"

namespace earshot::data {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json stats_to_json(const SceneStats& s) {
  return json{{"mean_speakers_per_frame", s.mean_speakers_per_frame},
              {"mean_visible_heads", s.mean_visible_heads},
              {"frames_with_target_frac", s.frames_with_target_frac},
              {"frames_out_of_group_frac", s.frames_out_of_group_frac}};
}

SceneStats stats_from_json(const json& j) {
  SceneStats s;
  s.mean_speakers_per_frame = j.at("mean_speakers_per_frame");
  s.mean_visible_heads = j.at("mean_visible_heads");
  s.frames_with_target_frac = j.at("frames_with_target_frac");
  s.frames_out_of_group_frac = j.at("frames_out_of_group_frac");
  return s;
}

SceneStats compute_stats(const sim::Scene& scene,
                         const std::vector<sim::FrameAnnotation>& annotations) {
  SceneStats st;
  st.mean_speakers_per_frame = sim::mean_speakers_per_frame(scene);
  int with_target = 0, out_of_group = 0;
  int64_t heads = 0;
  for (const auto& ann : annotations) {
    heads += static_cast<int64_t>(ann.persons.size());
    bool target = false, oog = false;
    for (const auto& p : ann.persons) {
      target |= p.attended;
      oog |= p.speaking && !p.in_wearer_group;
    }
    with_target += target ? 1 : 0;
    out_of_group += oog ? 1 : 0;
  }
  const double n = std::max<size_t>(1, annotations.size());
  st.mean_visible_heads = static_cast<double>(heads) / n;
  st.frames_with_target_frac = with_target / n;
  st.frames_out_of_group_frac = out_of_group / n;
  return st;
}

}  // namespace

std::string DatasetConfig::hash() const {
  Fnv1a h;
  h.update(std::string("dataset/v1|"));
  h.update(std::to_string(n_scenes) + "|" + std::to_string(seed) + "|" +
           std::to_string(audio_channels));
  const sim::SimConfig& s = sim;
  double vals[] = {s.duration_s, s.layout_mix_a, s.turn_mean_s, s.gap_mean_s, s.overlap_prob,
                   s.max_overlap_frac, s.reaction_lag_s, s.yaw_noise_deg, s.max_yaw_rate_deg_s,
                   s.pursuit_gain, s.glance_rate_hz, s.glance_dur_s, s.table_radius_m,
                   s.wearer_radial_frac, s.head_height_m, static_cast<double>(s.pool_lo),
                   static_cast<double>(s.pool_hi), render.snr_db, render.wearer_gain,
                   render.noise_ref_rms};
  h.update(vals, sizeof(vals));
  h.update(s.layout_name);
  return h.hex();
}

std::vector<sim::FrameAnnotation> annotate_scene(const sim::Scene& scene) {
  const int frames = scene.frame_count();
  std::vector<sim::FrameAnnotation> out(static_cast<size_t>(frames));
  for (int f = 0; f < frames; ++f) out[static_cast<size_t>(f)] = sim::project_heads(scene, f);
  return out;
}

std::string annotations_to_json(const std::vector<sim::FrameAnnotation>& annotations) {
  json arr = json::array();
  for (const auto& ann : annotations) {
    json persons = json::array();
    for (const auto& p : ann.persons) {
      persons.push_back({{"id", p.person_id},
                         {"box", {p.x0, p.y0, p.x1, p.y1}},
                         {"speaking", p.speaking},
                         {"in_group", p.in_wearer_group},
                         {"attended", p.attended},
                         {"envelope", p.envelope},
                         {"distance", p.distance_m}});
    }
    arr.push_back({{"frame", ann.frame_index},
                   {"wearer_speaking", ann.wearer_speaking},
                   {"persons", persons}});
  }
  return json{{"version", 1}, {"frames", arr}}.dump();
}

std::vector<sim::FrameAnnotation> annotations_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<sim::FrameAnnotation> out;
  for (const auto& fj : j.at("frames")) {
    sim::FrameAnnotation ann;
    ann.frame_index = fj.at("frame");
    ann.wearer_speaking = fj.at("wearer_speaking");
    for (const auto& pj : fj.at("persons")) {
      sim::PersonBox p;
      p.person_id = pj.at("id");
      p.x0 = pj.at("box")[0];
      p.y0 = pj.at("box")[1];
      p.x1 = pj.at("box")[2];
      p.y1 = pj.at("box")[3];
      p.speaking = pj.at("speaking");
      p.in_wearer_group = pj.at("in_group");
      p.attended = pj.at("attended");
      p.envelope = pj.at("envelope");
      p.distance_m = pj.at("distance");
      ann.persons.push_back(p);
    }
    out.push_back(std::move(ann));
  }
  return out;
}

Manifest generate_dataset(const DatasetConfig& cfg, bool force, int workers) {
  (void)workers;  // scene loop below is already OpenMP-parallel inside render
  const fs::path root(cfg.out_dir);
  if (fs::exists(root)) {
    if (!force) throw ConfigError("output path exists (use --force): " + cfg.out_dir);
    fs::remove_all(root);
  }
  fs::create_directories(root / "scenes");

  Manifest man;
  man.config_hash = cfg.hash();
  man.audio_channels = cfg.audio_channels;
  man.pool_lo = cfg.sim.pool_lo;
  man.pool_hi = cfg.sim.pool_hi;
  man.layout_mix_a = cfg.sim.layout_mix_a;

  const audio::MicArray array = audio::glasses_array(cfg.audio_channels);
  for (int i = 0; i < cfg.n_scenes; ++i) {
    const uint64_t seed = cfg.seed + static_cast<uint64_t>(i);
    const sim::Scene scene = sim::generate_scene(cfg.sim, seed);
    const auto annotations = annotate_scene(scene);
    const auto sources = audio::make_sources(scene);
    const auto audio_frames = audio::render_scene_audio(scene, sources, array, cfg.render);

    SceneEntry entry;
    entry.seed = seed;
    entry.dir = "scenes/" + std::to_string(seed);
    entry.layout = scene.layout.name;
    const fs::path sdir = root / entry.dir;
    fs::create_directories(sdir / "frames");
    fs::create_directories(sdir / "audio");

    const std::string meta = sim::serialize_scene(scene);
    write_text((sdir / "meta.json").string(), meta);
    entry.meta_hash = fnv1a_hex(meta);

    const std::string ann_json = annotations_to_json(annotations);
    write_text((sdir / "frames" / "annotations.json").string(), ann_json);
    entry.annotations_hash = fnv1a_hex(ann_json);

    audio::write_wav((sdir / "audio" / "mix.wav").string(), audio_frames, array.sample_rate);
    json sidecar = {{"samples_per_frame", kSamplesPerFrame},
                    {"channels", array.channels()},
                    {"frames", scene.frame_count()},
                    {"channel_order", "glasses_array index order"}};
    write_text((sdir / "audio" / "frames.json").string(), sidecar.dump());
    entry.audio_hash = hash_file((sdir / "audio" / "mix.wav").string());

    entry.stats = compute_stats(scene, annotations);
    man.scenes.push_back(entry);
  }

  // Aggregate stats and the dataset content hash.
  Fnv1a dh;
  SceneStats agg;
  for (const auto& e : man.scenes) {
    dh.update(e.meta_hash);
    dh.update(e.annotations_hash);
    dh.update(e.audio_hash);
    agg.mean_speakers_per_frame += e.stats.mean_speakers_per_frame;
    agg.mean_visible_heads += e.stats.mean_visible_heads;
    agg.frames_with_target_frac += e.stats.frames_with_target_frac;
    agg.frames_out_of_group_frac += e.stats.frames_out_of_group_frac;
  }
  const double n = std::max<size_t>(1, man.scenes.size());
  agg.mean_speakers_per_frame /= n;
  agg.mean_visible_heads /= n;
  agg.frames_with_target_frac /= n;
  agg.frames_out_of_group_frac /= n;
  man.aggregate = agg;
  man.dataset_hash = dh.hex();

  json mj;
  mj["version"] = man.version;
  mj["config_hash"] = man.config_hash;
  mj["dataset_hash"] = man.dataset_hash;
  mj["audio_channels"] = man.audio_channels;
  mj["pool_lo"] = man.pool_lo;
  mj["pool_hi"] = man.pool_hi;
  mj["layout_mix_a"] = man.layout_mix_a;
  mj["aggregate"] = stats_to_json(man.aggregate);
  json scenes = json::array();
  for (const auto& e : man.scenes) {
    scenes.push_back({{"seed", e.seed},
                      {"dir", e.dir},
                      {"layout", e.layout},
                      {"meta_hash", e.meta_hash},
                      {"annotations_hash", e.annotations_hash},
                      {"audio_hash", e.audio_hash},
                      {"stats", stats_to_json(e.stats)}});
  }
  mj["scenes"] = scenes;
  write_text((root / "manifest.json").string(), mj.dump(2));
  return man;
}

Manifest read_manifest(const std::string& dataset_dir) {
  const json j = json::parse(read_text((fs::path(dataset_dir) / "manifest.json").string()));
  Manifest man;
  man.version = j.at("version");
  man.config_hash = j.at("config_hash");
  man.dataset_hash = j.at("dataset_hash");
  man.audio_channels = j.at("audio_channels");
  man.pool_lo = j.at("pool_lo");
  man.pool_hi = j.at("pool_hi");
  man.layout_mix_a = j.at("layout_mix_a");
  man.aggregate = stats_from_json(j.at("aggregate"));
  for (const auto& e : j.at("scenes")) {
    SceneEntry s;
    s.seed = e.at("seed");
    s.dir = e.at("dir");
    s.layout = e.at("layout");
    s.meta_hash = e.at("meta_hash");
    s.annotations_hash = e.at("annotations_hash");
    s.audio_hash = e.at("audio_hash");
    s.stats = stats_from_json(e.at("stats"));
    man.scenes.push_back(s);
  }
  return man;
}

SceneData read_scene(const std::string& dataset_dir, const SceneEntry& entry) {
  const fs::path sdir = fs::path(dataset_dir) / entry.dir;
  SceneData out;
  out.scene = sim::parse_scene(read_text((sdir / "meta.json").string()));
  out.annotations = annotations_from_json(read_text((sdir / "frames" / "annotations.json").string()));
  out.audio_path = (sdir / "audio" / "mix.wav").string();
  return out;
}

std::vector<audio::AudioFrame> SceneData::load_audio() const {
  return audio::wav_to_frames(audio::read_wav(audio_path));
}

void assert_disjoint(const Manifest& a, const Manifest& b) {
  const bool pools_overlap = a.pool_lo < b.pool_hi && b.pool_lo < a.pool_hi;
  if (pools_overlap) {
    throw ConfigError("train/test participant pools overlap: [" + std::to_string(a.pool_lo) +
                      "," + std::to_string(a.pool_hi) + ") vs [" + std::to_string(b.pool_lo) +
                      "," + std::to_string(b.pool_hi) + ")");
  }
  for (const auto& sa : a.scenes) {
    for (const auto& sb : b.scenes) {
      if (sa.seed == sb.seed) {
        throw ConfigError("train/test scene seeds overlap at " + std::to_string(sa.seed));
      }
    }
  }
}

}  // namespace earshot::data
