#include "earshot/cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>

#include "earshot/core/hash.hpp"

namespace earshot::cli {

using json = nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"dataset",
       {"out_dir", "n_scenes", "seed", "audio_channels", "snr_db", "wearer_gain", "duration_s",
        "layout_mix_a", "layout_name", "turn_mean_s", "gap_mean_s", "overlap_prob",
        "max_overlap_frac", "reaction_lag_s", "yaw_noise_deg", "max_yaw_rate_deg_s",
        "pursuit_gain", "glance_rate_hz", "glance_dur_s", "table_radius_m", "wearer_radial_frac",
        "head_height_m", "pool_lo", "pool_hi"}},
      {"features", {"visual_mode", "stft_bins", "stft_window", "stft_hop", "alt_channel_stack"}},
      {"model", {"profile", "variant", "seed"}},
      {"train",
       {"dataset_dir", "eval_dataset_dir", "lr", "batch", "steps", "epochs", "eval_every",
        "log_every", "deterministic", "asl_modulated_loss", "seed", "checkpoint_out", "resume",
        "curve_csv", "diagnostic_path"}},
      {"eval",
       {"dataset_dir", "checkpoint", "baselines", "metrics_out", "records_csv", "overlay_dir",
        "overlay_frames", "granularity", "batch"}},
  };
  return s;
}

void validate_keys(const json& j) {
  const auto& sch = schema();
  for (const auto& [section, body] : j.items()) {
    auto it = sch.find(section);
    if (it == sch.end()) throw ConfigError("unknown config section: " + section);
    if (!body.is_object()) throw ConfigError("config section must be an object: " + section);
    for (const auto& [key, value] : body.items()) {
      (void)value;
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ConfigError("unknown config key: " + section + "." + key);
      }
    }
  }
}

void apply_env_overrides(json& j) {
  for (const auto& [section, keys] : schema()) {
    for (const auto& key : keys) {
      std::string var = "EARSHOT_" + section + "_" + key;
      for (auto& c : var) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const char* val = std::getenv(var.c_str());
      if (!val) continue;
      json parsed;
      try {
        parsed = json::parse(val);
      } catch (const json::parse_error&) {
        parsed = std::string(val);  // bare strings allowed
      }
      j[section][key] = parsed;
    }
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double get_snr(const json& j) {
  if (!j.contains("snr_db")) return std::numeric_limits<double>::infinity();
  const auto& v = j.at("snr_db");
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("dataset.snr_db must be a number or \"inf\"");
  }
  return v.get<double>();
}

}  // namespace

std::string RunConfig::compat_hash() const {
  Fnv1a h;
  h.update(model.hash());
  h.update(features.param_hash());
  return h.hex();
}

RunConfig RunConfig::from_json(json j, bool apply_env) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  if (apply_env) apply_env_overrides(j);
  validate_keys(j);

  RunConfig cfg;
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    get_if(d, "out_dir", cfg.dataset.out_dir);
    get_if(d, "n_scenes", cfg.dataset.n_scenes);
    get_if(d, "seed", cfg.dataset.seed);
    get_if(d, "audio_channels", cfg.dataset.audio_channels);
    cfg.dataset.render.snr_db = get_snr(d);
    get_if(d, "wearer_gain", cfg.dataset.render.wearer_gain);
    sim::SimConfig& s = cfg.dataset.sim;
    get_if(d, "duration_s", s.duration_s);
    get_if(d, "layout_mix_a", s.layout_mix_a);
    get_if(d, "layout_name", s.layout_name);
    get_if(d, "turn_mean_s", s.turn_mean_s);
    get_if(d, "gap_mean_s", s.gap_mean_s);
    get_if(d, "overlap_prob", s.overlap_prob);
    get_if(d, "max_overlap_frac", s.max_overlap_frac);
    get_if(d, "reaction_lag_s", s.reaction_lag_s);
    get_if(d, "yaw_noise_deg", s.yaw_noise_deg);
    get_if(d, "max_yaw_rate_deg_s", s.max_yaw_rate_deg_s);
    get_if(d, "pursuit_gain", s.pursuit_gain);
    get_if(d, "glance_rate_hz", s.glance_rate_hz);
    get_if(d, "glance_dur_s", s.glance_dur_s);
    get_if(d, "table_radius_m", s.table_radius_m);
    get_if(d, "wearer_radial_frac", s.wearer_radial_frac);
    get_if(d, "head_height_m", s.head_height_m);
    get_if(d, "pool_lo", s.pool_lo);
    get_if(d, "pool_hi", s.pool_hi);
  }
  if (j.contains("features")) {
    const json& f = j["features"];
    if (f.contains("visual_mode")) {
      cfg.features.visual_mode = feat::visual_mode_from_string(f.at("visual_mode"));
    }
    get_if(f, "stft_bins", cfg.features.stft.bins);
    get_if(f, "stft_window", cfg.features.stft.window_samples);
    get_if(f, "stft_hop", cfg.features.stft.hop_samples);
    get_if(f, "alt_channel_stack", cfg.features.alt_channel_stack);
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("profile")) cfg.model.profile = model::profile_from_string(m.at("profile"));
    if (m.contains("variant")) cfg.model.variant = model::variant_from_string(m.at("variant"));
    get_if(m, "seed", cfg.model_seed);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    get_if(t, "dataset_dir", cfg.train.dataset_dir);
    get_if(t, "eval_dataset_dir", cfg.train.eval_dataset_dir);
    get_if(t, "lr", cfg.train.opts.lr);
    get_if(t, "batch", cfg.train.opts.batch_size);
    get_if(t, "steps", cfg.train.opts.steps);
    get_if(t, "epochs", cfg.train.epochs);
    get_if(t, "eval_every", cfg.train.opts.eval_every);
    get_if(t, "log_every", cfg.train.opts.log_every);
    get_if(t, "deterministic", cfg.train.opts.deterministic);
    get_if(t, "asl_modulated_loss", cfg.train.opts.asl_modulated_loss);
    get_if(t, "seed", cfg.train.opts.seed);
    get_if(t, "checkpoint_out", cfg.train.checkpoint_out);
    get_if(t, "resume", cfg.train.resume);
    get_if(t, "curve_csv", cfg.train.opts.curve_csv);
    get_if(t, "diagnostic_path", cfg.train.opts.diagnostic_path);
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    get_if(e, "dataset_dir", cfg.eval.dataset_dir);
    get_if(e, "checkpoint", cfg.eval.checkpoint);
    if (e.contains("baselines")) {
      if (e.at("baselines").is_string()) {
        cfg.eval.baselines = {e.at("baselines").get<std::string>()};
      } else {
        cfg.eval.baselines = e.at("baselines").get<std::vector<std::string>>();
      }
    }
    get_if(e, "metrics_out", cfg.eval.metrics_out);
    get_if(e, "records_csv", cfg.eval.records_csv);
    get_if(e, "overlay_dir", cfg.eval.overlay_dir);
    get_if(e, "overlay_frames", cfg.eval.overlay_frames);
    get_if(e, "granularity", cfg.eval.granularity);
    get_if(e, "batch", cfg.eval.batch);
  }

  // Keep the audio plane count consistent with the featurization.
  cfg.model.audio_in_channels = cfg.features.audio_planes(cfg.dataset.audio_channels);
  cfg.config_hash = fnv1a_hex(j.dump());
  return cfg;
}

RunConfig RunConfig::load(const std::string& path, bool apply_env) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(std::move(j), apply_env);
}

}  // namespace earshot::cli
