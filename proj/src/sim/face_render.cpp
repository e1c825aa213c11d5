#include "earshot/sim/face_render.hpp"

#include <algorithm>
#include <cmath>

#include "earshot/core/rng.hpp"

namespace earshot::sim {

namespace {

constexpr uint64_t kTagBackground = 0x6267ull;
constexpr uint64_t kTagFace = 0x66616365ull;

// Coarse value-noise grid, bilinearly upsampled. Static per scene.
void paint_background(uint64_t scene_seed, uint8_t* out) {
  constexpr int kGrid = 9;
  float grid[kGrid][kGrid];
  Rng rng(derive_seed(scene_seed, kTagBackground));
  for (auto& row : grid) {
    for (auto& v : row) v = static_cast<float>(rng.uniform(100.0, 130.0));
  }
  for (int y = 0; y < kImageH; ++y) {
    const double gy = static_cast<double>(y) * (kGrid - 1) / (kImageH - 1);
    const int y0 = std::min(static_cast<int>(gy), kGrid - 2);
    const double fy = gy - y0;
    for (int x = 0; x < kImageW; ++x) {
      const double gx = static_cast<double>(x) * (kGrid - 1) / (kImageW - 1);
      const int x0 = std::min(static_cast<int>(gx), kGrid - 2);
      const double fx = gx - x0;
      const double top = grid[y0][x0] + fx * (grid[y0][x0 + 1] - grid[y0][x0]);
      const double bot = grid[y0 + 1][x0] + fx * (grid[y0 + 1][x0 + 1] - grid[y0 + 1][x0]);
      out[y * kImageW + x] = static_cast<uint8_t>(std::lround(top + fy * (bot - top)));
    }
  }
}

void fill_ellipse(uint8_t* out, double cx, double cy, double rx, double ry, uint8_t value) {
  if (rx <= 0 || ry <= 0) return;
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
  const int y1 = std::min(kImageH - 1, static_cast<int>(std::ceil(cy + ry)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
  const int x1 = std::min(kImageW - 1, static_cast<int>(std::ceil(cx + rx)));
  for (int y = y0; y <= y1; ++y) {
    const double dy = (y + 0.5 - cy) / ry;
    for (int x = x0; x <= x1; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      if (dx * dx + dy * dy <= 1.0) out[y * kImageW + x] = value;
    }
  }
}

}  // namespace

void render_frame_image(const FrameAnnotation& ann, uint64_t scene_seed, uint8_t* out) {
  paint_background(scene_seed, out);

  // Far heads first so near ones paint over them.
  std::vector<const PersonBox*> order;
  for (const auto& p : ann.persons) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const PersonBox* a, const PersonBox* b) {
    if (a->distance_m != b->distance_m) return a->distance_m > b->distance_m;
    return a->person_id < b->person_id;
  });

  for (const PersonBox* p : order) {
    Rng traits(derive_seed(kTagFace, static_cast<uint64_t>(p->person_id)));
    const uint8_t skin = static_cast<uint8_t>(185 + traits.uniform_int(50));
    const double cx = (p->x0 + p->x1) / 2, cy = (p->y0 + p->y1) / 2;
    const double rx = (p->x1 - p->x0) / 2, ry = (p->y1 - p->y0) / 2;
    fill_ellipse(out, cx, cy, rx, ry, skin);
    // Eyes.
    const double eye_r = std::max(0.6, 0.10 * rx);
    fill_ellipse(out, cx - 0.38 * rx, cy - 0.25 * ry, eye_r, eye_r, 45);
    fill_ellipse(out, cx + 0.38 * rx, cy - 0.25 * ry, eye_r, eye_r, 45);
    // Mouth: opening follows the speech envelope.
    const double mouth_w = 0.45 * rx;
    const double mouth_h = std::max(0.35, (0.06 + 0.42 * p->envelope) * ry);
    fill_ellipse(out, cx, cy + 0.45 * ry, mouth_w, mouth_h, 30);
  }
}

}  // namespace earshot::sim
