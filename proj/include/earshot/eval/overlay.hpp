#pragma once

#include <string>

#include "earshot/sim/types.hpp"

namespace earshot::eval {

// Heatmap overlay PNG: grayscale frame, attended-class probability blended
// in red, red box outlines on ground-truth attended people and white
// outlines on non-attended speakers.
void write_overlay_png(const std::string& path, const sim::FrameAnnotation& annotation,
                       uint64_t scene_seed, const float* attended_prob);

}  // namespace earshot::eval
