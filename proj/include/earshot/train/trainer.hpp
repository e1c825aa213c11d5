#pragma once

#include <functional>
#include <string>
#include <vector>

#include "earshot/model/network.hpp"
#include "earshot/nn/adam.hpp"
#include "earshot/train/clips.hpp"

namespace earshot::train {

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 32;
  int steps = 300;           // optimizer steps to run (on top of adam's count)
  uint64_t seed = 1;
  bool deterministic = true;
  int eval_every = 0;        // 0 = only at the end when eval set present
  int log_every = 10;
  bool asl_modulated_loss = false;
  std::string curve_csv;     // per-step loss curve, optional
  std::string diagnostic_path = "train_diagnostic.json";
};

struct TrainResult {
  std::vector<std::pair<int, double>> losses;  // (step, loss)
  double first_loss = 0;
  double last_loss = 0;
  double best_map = -1;
  int best_step = -1;
  std::vector<nn::Tensor<float>> best_params;  // snapshot at best_map
};

// Mini-batch Adam on pixelwise cross entropy. Non-finite loss writes a
// diagnostic dump and throws NumericError. Deterministic for fixed
// (config, dataset, worker count).
TrainResult train_model(model::Network<float>& net, nn::Adam<float>& opt, ClipDataset& train_ds,
                        const ClipDataset* eval_ds, const TrainConfig& cfg);

void snapshot_params(model::Network<float>& net, std::vector<nn::Tensor<float>>& out);
void restore_params(model::Network<float>& net, const std::vector<nn::Tensor<float>>& snap);

}  // namespace earshot::train
