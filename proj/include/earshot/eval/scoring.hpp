#pragma once

#include <map>
#include <string>
#include <vector>

#include "earshot/eval/baselines.hpp"
#include "earshot/eval/map.hpp"
#include "earshot/model/network.hpp"
#include "earshot/train/clips.hpp"

namespace earshot::eval {

// Auditory attention score for one person: the maximum attended-class
// softmax probability inside their head box. `prob` is one 200x212 frame of
// attended-class probabilities.
double person_score(const float* prob, const sim::PersonBox& box);

struct EvalOutputs {
  std::vector<EvalRecord> records;
  double map = 0;
};

// Runs the model over every clip of the dataset (non-overlapping 24-frame
// windows, stride-3 frames inside) and scores every visible person of every
// evaluated frame. Ordering of records is deterministic: (scene, frame,
// person index).
EvalOutputs evaluate_model(model::Network<float>& net, const train::ClipDataset& ds,
                           int batch_size, MapGranularity granularity = MapGranularity::Pooled);

// Baseline records over the same evaluated frames.
std::map<std::string, double> evaluate_baselines(const train::ClipDataset& ds,
                                                 const std::vector<BaselineKind>& kinds,
                                                 MapGranularity granularity,
                                                 std::map<std::string, std::vector<EvalRecord>>*
                                                     records_out = nullptr);

}  // namespace earshot::eval
