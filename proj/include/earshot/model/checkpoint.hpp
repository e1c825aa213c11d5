#pragma once

#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "earshot/model/network.hpp"
#include "earshot/nn/adam.hpp"

namespace earshot::model {

// Versioned binary container: magic, JSON-ish meta, named parameter blobs,
// optional Adam state. Loading refuses a config-hash mismatch unless forced.
struct CheckpointMeta {
  std::string profile;
  std::string variant;
  int audio_in_channels = 3;
  std::string config_hash;   // model+features compatibility hash
  std::string dataset_hash;  // training dataset
  int pool_lo = 0, pool_hi = 0;
  int64_t step = 0;
  bool has_optimizer = false;
};

void save_checkpoint(const std::string& path, Network<float>& net, nn::Adam<float>* opt,
                     const CheckpointMeta& meta);

CheckpointMeta read_checkpoint_meta(const std::string& path);

// Loads parameters (and optimizer state when `opt` is given and present).
// Throws HashMismatchError when expected_config_hash differs, unless force.
CheckpointMeta load_checkpoint(const std::string& path, Network<float>& net,
                               nn::Adam<float>* opt, const std::string& expected_config_hash,
                               bool force);

}  // namespace earshot::model
