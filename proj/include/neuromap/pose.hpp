#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "neuromap/error.hpp"

namespace neuromap {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

inline double deg2rad(double deg) { return deg * kRadPerDeg; }
inline double rad2deg(double rad) { return rad * kDegPerRad; }

/// Wraps an angle in degrees into (-180, +180]. -180 maps to +180.
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) fail(ErrorKind::kInvalidArgument, "wrap_angle: non-finite angle");
  double r = std::fmod(a, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

/// Signed smallest rotation taking b onto a, in (-180, +180].
inline double ang_diff(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::kInvalidArgument, "ang_diff: non-finite angle");
  return wrap_angle(a - b);
}

/// Planar pose: metres and degrees. Yaw is kept wrapped into (-180, +180].
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta_deg) : x_(x), y_(y), theta_(wrap_angle(theta_deg)) {
    if (!std::isfinite(x) || !std::isfinite(y)) fail(ErrorKind::kInvalidArgument, "Pose2D: non-finite position");
  }

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  void set_position(double x, double y) { *this = Pose2D(x, y, theta_); }
  void set_theta(double theta_deg) { theta_ = wrap_angle(theta_deg); }
  void rotate(double delta_deg) { theta_ = wrap_angle(theta_ + delta_deg); }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// Axis-aligned metric extent of an environment.
struct EnvBounds {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  EnvBounds() = default;
  EnvBounds(double x0, double x1, double y0, double y1) : x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
    if (!(x_min < x_max) || !(y_min < y_max)) fail(ErrorKind::kInvalidArgument, "EnvBounds: empty extent");
  }

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }

  friend bool operator==(const EnvBounds&, const EnvBounds&) = default;
};

/// Pose mapped linearly into [-1, +1]^3 against environment bounds.
struct NormalizedPose {
  double nx = 0.0;
  double ny = 0.0;
  double ntheta = 0.0;
};

/// A pose produced by an estimator. `clamped` is set when a normalised
/// output had to be clamped back into [-1, +1] before denormalisation.
struct PoseEstimate {
  Pose2D pose;
  bool clamped = false;
};

inline double distance(const Pose2D& p, const Pose2D& q) { return std::hypot(p.x() - q.x(), p.y() - q.y()); }

inline constexpr double kHeadingEpsilon = 1e-9;

/// Bearing of the vector from -> to, counter-clockwise from +x, in degrees.
inline double heading(const Pose2D& from, const Pose2D& to, double epsilon = kHeadingEpsilon) {
  const double dx = to.x() - from.x();
  const double dy = to.y() - from.y();
  if (std::hypot(dx, dy) <= epsilon) fail(ErrorKind::kDegenerate, "heading: coincident points");
  return wrap_angle(rad2deg(std::atan2(dy, dx)));
}

inline NormalizedPose normalize(const Pose2D& p, const EnvBounds& b) {
  if (!b.contains(p.x(), p.y())) fail(ErrorKind::kOutOfBounds, "normalize: pose outside environment bounds");
  return {2.0 * (p.x() - b.x_min) / b.width() - 1.0, 2.0 * (p.y() - b.y_min) / b.height() - 1.0, p.theta() / 180.0};
}

inline PoseEstimate denormalize(const NormalizedPose& n, const EnvBounds& b) {
  bool clamped = false;
  auto clamp = [&clamped](double v) {
    if (std::isnan(v)) fail(ErrorKind::kInvalidArgument, "denormalize: NaN component");
    if (v < -1.0 || v > 1.0) {
      clamped = true;
      return std::clamp(v, -1.0, 1.0);
    }
    return v;
  };
  const double nx = clamp(n.nx);
  const double ny = clamp(n.ny);
  const double nt = clamp(n.ntheta);
  const double x = b.x_min + (nx + 1.0) * 0.5 * b.width();
  const double y = b.y_min + (ny + 1.0) * 0.5 * b.height();
  return {Pose2D(x, y, nt * 180.0), clamped};
}

inline constexpr double kIndeterminateMean = 1e-12;

/// Weighted circular mean of angles in degrees.
inline double circular_mean(std::span<const double> angles, std::span<const double> weights) {
  if (angles.empty() || angles.size() != weights.size())
    fail(ErrorKind::kInvalidArgument, "circular_mean: sequences must be non-empty and of equal length");
  // A lone angle is its own mean; skip the trig round trip so it stays exact.
  if (angles.size() == 1) {
    if (!(weights[0] > 0.0) || !std::isfinite(weights[0]))
      fail(ErrorKind::kInvalidArgument, "circular_mean: weight must be positive");
    return wrap_angle(angles[0]);
  }
  double c = 0.0, s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::kInvalidArgument, "circular_mean: negative weight");
    const double r = deg2rad(angles[i]);
    c += w * std::cos(r);
    s += w * std::sin(r);
    wsum += w;
  }
  if (!(wsum > 0.0)) fail(ErrorKind::kInvalidArgument, "circular_mean: weights sum to zero");
  c /= wsum;
  s /= wsum;
  if (std::hypot(c, s) < kIndeterminateMean) fail(ErrorKind::kDegenerate, "circular_mean: indeterminate (antipodal) mean");
  return wrap_angle(rad2deg(std::atan2(s, c)));
}

}  // namespace neuromap
