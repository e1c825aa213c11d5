#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "earshot/data/dataset.hpp"
#include "earshot/eval/map.hpp"
#include "earshot/feat/features.hpp"
#include "earshot/model/config.hpp"
#include "earshot/train/trainer.hpp"

namespace earshot::cli {

// Top-level run configuration: a JSON document with one section per command
// scope. Unknown keys are rejected; every artifact records the hashes below.
// Environment overrides: EARSHOT_<SECTION>_<KEY>=<json value>.
struct RunConfig {
  data::DatasetConfig dataset;
  feat::FeaturizeConfig features;
  model::ModelConfig model;
  uint64_t model_seed = 1;

  struct Train {
    std::string dataset_dir;
    std::string eval_dataset_dir;  // optional
    train::TrainConfig opts;
    int epochs = 0;  // alternative to steps: steps = epochs * ceil(n/batch)
    std::string checkpoint_out = "checkpoint.bin";
    std::string resume;  // optional checkpoint to continue from
  } train;

  struct Eval {
    std::string dataset_dir;
    std::string checkpoint;
    std::vector<std::string> baselines;  // names or "all"
    std::string metrics_out = "metrics.json";
    std::string records_csv;   // optional per-record dump
    std::string overlay_dir;   // optional PNG overlays
    int overlay_frames = 0;
    std::string granularity = "pooled";
    int batch = 4;
  } eval;

  // Hash of the full config document (canonical JSON).
  std::string config_hash;
  // Hash of the model+features sections: artifacts produced with different
  // compatibility hashes cannot be mixed without --force.
  std::string compat_hash() const;

  static RunConfig load(const std::string& path, bool apply_env = true);
  static RunConfig from_json(nlohmann::json j, bool apply_env = true);
};

}  // namespace earshot::cli
