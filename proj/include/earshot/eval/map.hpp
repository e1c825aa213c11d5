#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "earshot/core/common.hpp"

namespace earshot::eval {

struct EvalRecord {
  uint64_t scene_id = 0;
  int frame_index = 0;
  int person_id = 0;
  double score = 0;
  bool attended = false;
};

enum class MapGranularity { Pooled, PerScene };

// Average precision over one pooled ranking, descending score. Tied scores
// form a block: precision is evaluated at the end of the block and shared by
// every positive inside it, which makes binary-scored baselines
// order-independent.
double compute_ap(const std::vector<EvalRecord>& records);

// Pooled is canonical; PerScene averages per-scene AP over scenes that have
// at least one positive (sensitivity analysis only).
double compute_map(const std::vector<EvalRecord>& records,
                   MapGranularity granularity = MapGranularity::Pooled);

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records);

}  // namespace earshot::eval
