#pragma once

#include <cstdint>
#include <vector>

#include "earshot/sim/types.hpp"

namespace earshot::sim {

// Procedural grayscale frame: low-contrast static background texture plus a
// schematic face per visible head (filled ellipse, eye dots, and a mouth
// whose opening follows the speech envelope). Output is row-major 200x212,
// values 0..255.
void render_frame_image(const FrameAnnotation& annotation, uint64_t scene_seed, uint8_t* out);

}  // namespace earshot::sim
