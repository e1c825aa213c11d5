#include "earshot/sim/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "earshot/sim/scene.hpp"

namespace earshot::sim {

ProjectedHead project_head(const Scene& scene, int frame_index, size_t pi) {
  ProjectedHead out;
  const Participant& person = scene.participants[pi];
  const Participant& wearer = scene.wearer();
  const double yaw = scene.pose.yaw[static_cast<size_t>(frame_index)];
  const double pitch = scene.pose.pitch[static_cast<size_t>(frame_index)];
  const Vec3 d = person.position - wearer.position;
  const Vec3 h = world_to_head(d, yaw, pitch);
  out.distance = d.norm();
  out.azimuth = head_azimuth(h);
  out.elevation = head_elevation(h);
  if (std::abs(out.azimuth) > M_PI / 2) return out;  // outside the 180-deg FOV

  const double rho = std::sqrt(h.x * h.x + h.y * h.y);
  const double theta = std::atan2(rho, h.z);
  const double r = kFisheyeFocal * theta;
  out.cx = kImageW / 2.0 + (rho > 1e-12 ? r * h.x / rho : 0.0);
  out.cy = kImageH / 2.0 + (rho > 1e-12 ? r * h.y / rho : 0.0);
  const double ang_radius = std::atan2(person.head_radius, out.distance);
  out.half_w = kFisheyeFocal * ang_radius;
  out.half_h = 1.25 * out.half_w;
  out.visible = true;
  return out;
}

FrameAnnotation project_heads(const Scene& scene, int frame_index) {
  FrameAnnotation ann;
  ann.frame_index = frame_index;
  const double t = static_cast<double>(frame_index) / scene.fps;
  ann.wearer_speaking = scene.speaking_at(0, t);
  for (size_t pi = 1; pi < scene.participants.size(); ++pi) {
    const ProjectedHead ph = project_head(scene, frame_index, pi);
    if (!ph.visible) continue;
    PersonBox box;
    box.person_id = scene.participants[pi].id;
    box.x0 = std::clamp(ph.cx - ph.half_w, 0.0, static_cast<double>(kImageW));
    box.x1 = std::clamp(ph.cx + ph.half_w, 0.0, static_cast<double>(kImageW));
    box.y0 = std::clamp(ph.cy - ph.half_h, 0.0, static_cast<double>(kImageH));
    box.y1 = std::clamp(ph.cy + ph.half_h, 0.0, static_cast<double>(kImageH));
    if (box.x1 - box.x0 < 0.5 || box.y1 - box.y0 < 0.5) continue;
    box.speaking = scene.speaking_at(pi, t);
    box.in_wearer_group = scene.participants[pi].group_id == 0;
    box.attended = box.speaking && box.in_wearer_group;
    box.envelope = static_cast<float>(envelope_at(scene, pi, t));
    box.distance_m = static_cast<float>(ph.distance);
    ann.persons.push_back(box);
  }
  return ann;
}

std::vector<int> attention_labels(const FrameAnnotation& ann) {
  std::vector<int> out;
  for (const auto& p : ann.persons) {
    if (p.attended) out.push_back(p.person_id);
  }
  return out;
}

PixelSpan rasterize_box(double x0, double y0, double x1, double y1) {
  PixelSpan s;
  s.x0 = static_cast<int>(std::ceil(x0 - 1e-7));
  s.x1 = static_cast<int>(std::ceil(x1 - 1e-7));
  s.y0 = static_cast<int>(std::ceil(y0 - 1e-7));
  s.y1 = static_cast<int>(std::ceil(y1 - 1e-7));
  // A valid sub-pixel box still owns the pixel under its center.
  if (s.x0 >= s.x1 && x1 > x0) {
    s.x0 = std::clamp(static_cast<int>((x0 + x1) / 2), 0, kImageW - 1);
    s.x1 = s.x0 + 1;
  }
  if (s.y0 >= s.y1 && y1 > y0) {
    s.y0 = std::clamp(static_cast<int>((y0 + y1) / 2), 0, kImageH - 1);
    s.y1 = s.y0 + 1;
  }
  s.x0 = std::clamp(s.x0, 0, kImageW);
  s.x1 = std::clamp(s.x1, 0, kImageW);
  s.y0 = std::clamp(s.y0, 0, kImageH);
  s.y1 = std::clamp(s.y1, 0, kImageH);
  return s;
}

namespace {

void fill_boxes(const FrameAnnotation& ann, uint8_t* out, bool attended_only) {
  std::memset(out, 0, static_cast<size_t>(kImageH) * kImageW);
  for (const auto& p : ann.persons) {
    if (attended_only ? !p.attended : !p.speaking) continue;
    const PixelSpan s = rasterize_box(p.x0, p.y0, p.x1, p.y1);
    for (int y = s.y0; y < s.y1; ++y) {
      std::memset(out + static_cast<size_t>(y) * kImageW + s.x0, 1,
                  static_cast<size_t>(s.x1 - s.x0));
    }
  }
}

}  // namespace

void label_heatmap(const FrameAnnotation& ann, uint8_t* out) { fill_boxes(ann, out, true); }

void speaker_mask(const FrameAnnotation& ann, uint8_t* out) { fill_boxes(ann, out, false); }

}  // namespace earshot::sim
