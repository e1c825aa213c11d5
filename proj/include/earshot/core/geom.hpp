#pragma once

#include <cmath>

namespace earshot {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
};

// World frame: x east, y north, z up. Seats live in the z=0 plane at head
// height. Head frame (shared by camera and mic array): z forward along the
// gaze, x right, y down. Yaw rotates left-positive around world z; pitch
// tilts the gaze up-positive.
//
// world_to_head maps a world-frame offset (relative to the head origin) into
// head-frame coordinates for a wearer looking along azimuth `yaw` measured
// from world +y (counter-clockwise positive).
inline Vec3 world_to_head(const Vec3& d, double yaw, double pitch) {
  // Rotate world so the gaze azimuth lands on +y, then swap axes into the
  // camera convention and apply pitch.
  double cy = std::cos(yaw), sy = std::sin(yaw);
  double fx = cy * d.x - sy * d.y;   // rightward component
  double fy = sy * d.x + cy * d.y;   // forward component
  double fz = d.z;                   // up component
  double cp = std::cos(pitch), sp = std::sin(pitch);
  // Pitch rotates forward/up; camera y axis points down.
  double hf = cp * fy + sp * fz;     // forward after pitch
  double hu = -sp * fy + cp * fz;    // up after pitch
  return {fx, -hu, hf};              // x right, y down, z forward
}

// Signed horizontal angle of a head-frame direction, zero on the optical
// axis, positive to the right.
inline double head_azimuth(const Vec3& h) { return std::atan2(h.x, h.z); }

inline double head_elevation(const Vec3& h) {
  return std::atan2(-h.y, std::sqrt(h.x * h.x + h.z * h.z));
}

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2 * M_PI;
  while (a <= -M_PI) a += 2 * M_PI;
  return a;
}

}  // namespace earshot
