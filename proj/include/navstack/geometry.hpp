#pragma once

#include <cmath>

namespace navstack {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Pose in world coordinates; heading in degrees, normalized to [0, 360).
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;

  Vec2 position() const { return {x, y}; }
};

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Normalizes an angle in degrees to [0, 360).
inline double normalize_deg(double a) {
  double r = std::fmod(a, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

// Maps a [0, 360) error to a signed value in (-180, 180].
inline double signed_deg(double a) {
  double r = normalize_deg(a);
  return r > 180.0 ? r - 360.0 : r;
}

inline Vec2 heading_dir(double heading_deg) {
  double h = deg_to_rad(heading_deg);
  return {std::cos(h), std::sin(h)};
}

// Rotates a vector by the given angle (counterclockwise positive).
inline Vec2 rotate(const Vec2& v, double angle_deg) {
  double a = deg_to_rad(angle_deg);
  double c = std::cos(a), s = std::sin(a);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Expresses pose p in the coordinate frame defined by `frame`.
inline Pose2D relative_to(const Pose2D& p, const Pose2D& frame) {
  Vec2 d = rotate(p.position() - frame.position(), -frame.heading_deg);
  return {d.x, d.y, normalize_deg(p.heading_deg - frame.heading_deg)};
}

// Inverse of relative_to: maps a pose expressed in `frame` back to the
// frame's parent coordinates.
inline Pose2D compose(const Pose2D& frame, const Pose2D& local) {
  Vec2 d = frame.position() + rotate(local.position(), frame.heading_deg);
  return {d.x, d.y, normalize_deg(frame.heading_deg + local.heading_deg)};
}

}  // namespace navstack
