#pragma once

#include <string>
#include <vector>

#include "earshot/sim/types.hpp"

namespace earshot::eval {

// Heuristic baselines. All of them read ground truth the learned model never
// sees: speaking flags, the wearer's own voice activity, per-person close-mic
// energy and distance.
enum class BaselineKind { PerfectASL, CP1, CP2, CS1, CS2, LS1, LS2 };

BaselineKind baseline_from_string(const std::string& s);
const char* to_string(BaselineKind k);
const std::vector<BaselineKind>& all_baselines();

// Ground-truth side information for one frame, aligned with
// FrameAnnotation::persons. Close-mic energy is the squared speech envelope
// of that person's own source; distance comes from the scene geometry.
struct BaselineContext {
  bool wearer_speaking = false;
  std::vector<double> mic_energy;   // A
  std::vector<double> distance_m;   // d
};

BaselineContext make_baseline_context(const sim::FrameAnnotation& annotation);

// Scores aligned with annotation.persons: selected people get 1, others 0.
// Geometric ties break toward the lowest person id.
std::vector<double> baseline_scores(const sim::FrameAnnotation& annotation,
                                    const BaselineContext& ctx, BaselineKind kind);

}  // namespace earshot::eval
