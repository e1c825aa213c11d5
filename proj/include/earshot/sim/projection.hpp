#pragma once

#include <cstdint>
#include <vector>

#include "earshot/sim/types.hpp"

namespace earshot::sim {

// Equidistant fisheye camera (r = f * theta). The focal constant maps a
// 90-degree ray onto the horizontal image border, so azimuth +-90 lands on
// the left/right edge band.
inline constexpr double kFisheyeFocal = (kImageW / 2.0) / (M_PI / 2.0);

struct ProjectedHead {
  bool visible = false;
  double cx = 0, cy = 0;        // projected head center before clipping
  double half_w = 0, half_h = 0;
  double azimuth = 0, elevation = 0, distance = 0;
};

// Projects one participant's head into the wearer camera at `frame_index`.
ProjectedHead project_head(const Scene& scene, int frame_index, size_t participant_index);

// All visible heads with speaking/group/attention flags and envelopes.
FrameAnnotation project_heads(const Scene& scene, int frame_index);

// Person ids with speaking && in_wearer_group.
std::vector<int> attention_labels(const FrameAnnotation& annotation);

// Integer pixel range [first, last) covered by a continuous box edge pair.
// Guarantees at least one pixel for a valid (positive-area) box.
struct PixelSpan {
  int x0, x1, y0, y1;
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};
PixelSpan rasterize_box(double x0, double y0, double x1, double y1);

// Binary 200x212 map with attended head boxes set to 1.
void label_heatmap(const FrameAnnotation& annotation, uint8_t* out);

// Binary 200x212 map with every speaker's head box set to 1 (attended or
// not); the gating mask for the modulated loss.
void speaker_mask(const FrameAnnotation& annotation, uint8_t* out);

}  // namespace earshot::sim
