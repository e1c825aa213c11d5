#include "earshot/eval/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "earshot/core/png.hpp"
#include "earshot/sim/face_render.hpp"
#include "earshot/sim/projection.hpp"

namespace earshot::eval {

namespace {

void draw_rect(std::vector<uint8_t>& rgb, const sim::PixelSpan& s, uint8_t r, uint8_t g,
               uint8_t b) {
  auto put = [&](int x, int y) {
    if (x < 0 || x >= kImageW || y < 0 || y >= kImageH) return;
    const size_t i = (static_cast<size_t>(y) * kImageW + static_cast<size_t>(x)) * 3;
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  };
  for (int x = s.x0; x < s.x1; ++x) {
    put(x, s.y0);
    put(x, s.y1 - 1);
  }
  for (int y = s.y0; y < s.y1; ++y) {
    put(s.x0, y);
    put(s.x1 - 1, y);
  }
}

}  // namespace

void write_overlay_png(const std::string& path, const sim::FrameAnnotation& ann,
                       uint64_t scene_seed, const float* prob) {
  std::vector<uint8_t> gray(static_cast<size_t>(kImageH) * kImageW);
  sim::render_frame_image(ann, scene_seed, gray.data());
  std::vector<uint8_t> rgb(gray.size() * 3);
  for (size_t i = 0; i < gray.size(); ++i) {
    const float p = std::clamp(prob ? prob[i] : 0.f, 0.f, 1.f);
    const float alpha = 0.65f * p;
    const float base = gray[i];
    rgb[3 * i] = static_cast<uint8_t>(std::lround(base + alpha * (255.f - base)));
    rgb[3 * i + 1] = static_cast<uint8_t>(std::lround(base * (1.f - alpha)));
    rgb[3 * i + 2] = static_cast<uint8_t>(std::lround(base * (1.f - alpha)));
  }
  for (const auto& p : ann.persons) {
    if (!p.speaking && !p.attended) continue;
    const sim::PixelSpan s = sim::rasterize_box(p.x0, p.y0, p.x1, p.y1);
    if (p.attended) {
      draw_rect(rgb, s, 255, 0, 0);
    } else {
      draw_rect(rgb, s, 255, 255, 255);
    }
  }
  write_png_rgb(path, rgb.data(), kImageW, kImageH);
}

}  // namespace earshot::eval
