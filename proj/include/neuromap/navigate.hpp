#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "neuromap/error.hpp"
#include "neuromap/estimator.hpp"
#include "neuromap/pose.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/textio.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

struct NavConfig {
  double t_d = 0.5;              // waypoint distance threshold, metres
  double t_a = 5.0;              // heading threshold, degrees
  double max_step = 1.0;         // longest movement leg, metres
  double linear_speed = 0.5;     // m/s
  double angular_speed = 30.0;   // deg/s
  double dt = 0.1;               // s per tick
  long max_ticks = 20000;
  double footprint_radius = 0.5;
  std::optional<double> t_leg;   // movement-leg tolerance; unset means t_d

  double leg_tolerance() const { return t_leg.value_or(t_d); }

  void validate() const {
    if (!(t_d > 0 && t_a > 0 && max_step > 0 && linear_speed > 0 && angular_speed > 0 && dt > 0 && max_ticks > 0 &&
          footprint_radius >= 0))
      fail(ErrorKind::kInvalidArgument, "NavConfig: thresholds, speeds, dt and max_ticks must be positive");
    if (!(t_d < max_step)) fail(ErrorKind::kInvalidArgument, "NavConfig: t_d must be smaller than max_step");
    if (t_leg && !(*t_leg > 0)) fail(ErrorKind::kInvalidArgument, "NavConfig: t_leg must be positive");
  }
};

struct OdometryConfig {
  double sigma_lin_frac = 0.01;     // std-dev as a fraction of the distance moved
  double sigma_ang_per_step = 0.5;  // degrees per rotation tick
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_lin_frac >= 0 && sigma_ang_per_step >= 0)) fail(ErrorKind::kInvalidArgument, "OdometryConfig: negative sigma");
  }
};

struct TickResult {
  Pose2D pose;         // true pose after the tick
  double odometry;     // measured delta (degrees for rotation, metres for motion)
  bool collision = false;
};

/// Rotate in place by direction * angular_speed * dt.
inline TickResult simulate_rotation_tick(const Pose2D& pose, int direction, const NavConfig& nav,
                                         const OdometryConfig& odo, Rng& rng) {
  const double delta = (direction >= 0 ? 1.0 : -1.0) * nav.angular_speed * nav.dt;
  Pose2D next = pose;
  next.rotate(delta);
  const double noise = odo.sigma_ang_per_step > 0 ? rng.normal(0.0, odo.sigma_ang_per_step) : 0.0;
  return {next, delta + noise, false};
}

/// Advance linear_speed * dt along the true heading. A footprint collision at
/// the new position is reported; the returned pose is the intersecting one.
inline TickResult simulate_move_tick(const Pose2D& pose, const OccupancyGrid& grid, const NavConfig& nav,
                                     const OdometryConfig& odo, Rng& rng) {
  const double d = nav.linear_speed * nav.dt;
  const double rad = deg2rad(pose.theta());
  const Pose2D next(pose.x() + d * std::cos(rad), pose.y() + d * std::sin(rad), pose.theta());
  const double noise = odo.sigma_lin_frac > 0 ? rng.normal(0.0, odo.sigma_lin_frac * d) : 0.0;
  return {next, d + noise, !footprint_free(grid, next, nav.footprint_radius)};
}

enum class NavEvent { kEstimate, kRotate, kMove, kWaypointReached, kCollision, kAbort };

inline const char* to_string(NavEvent e) {
  switch (e) {
    case NavEvent::kEstimate: return "estimate";
    case NavEvent::kRotate: return "rotate";
    case NavEvent::kMove: return "move";
    case NavEvent::kWaypointReached: return "waypoint-reached";
    case NavEvent::kCollision: return "collision";
    case NavEvent::kAbort: return "abort";
  }
  return "?";
}

inline NavEvent parse_nav_event(std::string_view s) {
  for (auto e : {NavEvent::kEstimate, NavEvent::kRotate, NavEvent::kMove, NavEvent::kWaypointReached, NavEvent::kCollision,
                 NavEvent::kAbort})
    if (s == to_string(e)) return e;
  fail(ErrorKind::kParse, "unknown trace event '" + std::string(s) + "'");
}

struct TraceTick {
  long tick = 0;
  double time = 0.0;
  Pose2D truth;
  PoseEstimate estimate;
  std::size_t waypoint = 0;
  NavEvent event = NavEvent::kEstimate;
};

using RouteTrace = std::vector<TraceTick>;

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

struct WaypointOutcome {
  bool reached = false;
  double closest_true_dist = std::numeric_limits<double>::infinity();
  double closest_est_dist = std::numeric_limits<double>::infinity();
};

struct NavReport {
  std::vector<WaypointOutcome> waypoints;
  double mean_closest_true_dist = 0.0;
  double mean_closest_est_dist = 0.0;
  long ticks = 0;
  bool success = false;
};

enum class NavStatus { kSuccess, kCollision, kEstimatorFailure, kTickBudget };

inline const char* to_string(NavStatus s) {
  switch (s) {
    case NavStatus::kSuccess: return "success";
    case NavStatus::kCollision: return "collision";
    case NavStatus::kEstimatorFailure: return "estimator-failure";
    case NavStatus::kTickBudget: return "tick-budget";
  }
  return "?";
}

struct NavResult {
  RouteTrace trace;
  NavReport report;
  NavStatus status = NavStatus::kSuccess;
  std::string message;
};

/// Per-waypoint closest approach of the true and estimated poses, taken over
/// the ticks during which that waypoint was the active target.
inline NavReport closest_distance_metrics(const RouteTrace& trace, const std::vector<Waypoint>& waypoints) {
  if (trace.empty()) fail(ErrorKind::kInvalidArgument, "closest_distance_metrics: empty trace");
  NavReport r;
  r.waypoints.resize(waypoints.size());
  for (const TraceTick& t : trace) {
    if (t.waypoint >= waypoints.size()) continue;
    const Pose2D w(waypoints[t.waypoint].x, waypoints[t.waypoint].y, 0.0);
    auto& o = r.waypoints[t.waypoint];
    o.closest_true_dist = std::min(o.closest_true_dist, distance(t.truth, w));
    o.closest_est_dist = std::min(o.closest_est_dist, distance(t.estimate.pose, w));
    if (t.event == NavEvent::kWaypointReached) o.reached = true;
  }
  double st = 0.0, se = 0.0;
  std::size_t active = 0;
  r.success = !waypoints.empty();
  for (const auto& o : r.waypoints) {
    r.success = r.success && o.reached;
    if (std::isfinite(o.closest_true_dist)) {
      st += o.closest_true_dist;
      se += o.closest_est_dist;
      ++active;
    }
  }
  r.mean_closest_true_dist = active ? st / static_cast<double>(active) : 0.0;
  r.mean_closest_est_dist = active ? se / static_cast<double>(active) : 0.0;
  r.ticks = static_cast<long>(trace.size());
  return r;
}

namespace detail {

struct NavAbort {
  NavStatus status;
  std::string message;
};

}  // namespace detail

/// Waypoint following: estimate, rotate toward the waypoint heading until
/// odometry says the turn is within t_a, then advance a leg of min(D, 1 m)
/// until odometry is within the leg tolerance, re-estimating between
/// phases. Observations are always synthesised at the true pose.
inline NavResult navigate_waypoints(const std::vector<Waypoint>& waypoints, Estimator& estimator,
                                    const EnvironmentSpec& env, const Pose2D& start, const NavConfig& nav,
                                    const OdometryConfig& odo) {
  nav.validate();
  odo.validate();
  if (waypoints.empty()) fail(ErrorKind::kInvalidArgument, "navigate: empty waypoint list");
  if (!footprint_free(env.grid, start, nav.footprint_radius))
    fail(ErrorKind::kInvalidArgument, "navigate: start pose footprint is not free");
  if (auto d = estimator.input_dim(); d && *d != static_cast<std::size_t>(env.sensor.ray_count))
    fail(ErrorKind::kConfiguration, "navigate: estimator input size does not match the environment sensor");

  NavResult result;
  Rng odo_rng(odo.seed);
  Pose2D truth = start;
  PoseEstimate last{start, false};
  std::size_t active = 0;
  long tick = 0;

  auto record = [&](NavEvent e) {
    if (tick >= nav.max_ticks) throw detail::NavAbort{NavStatus::kTickBudget, "tick budget exhausted"};
    result.trace.push_back({tick, static_cast<double>(tick) * nav.dt, truth, last, active, e});
    ++tick;
  };
  auto estimate = [&]() -> Pose2D {
    try {
      const Observation obs = raycast(env, truth);
      last = estimator.estimate(Frame{obs, truth});
    } catch (const Error& e) {
      throw detail::NavAbort{NavStatus::kEstimatorFailure, e.what()};
    }
    record(NavEvent::kEstimate);
    return last.pose;
  };

  const double t_leg = nav.leg_tolerance();
  try {
    for (active = 0; active < waypoints.size(); ++active) {
      const Pose2D w(waypoints[active].x, waypoints[active].y, 0.0);
      Pose2D p = estimate();
      double d = distance(w, p);
      while (d > nav.t_d) {
        const double h = heading(p, w);
        while (std::abs(ang_diff(p.theta(), h)) > nav.t_a) {
          const double r = wrap_angle(h - p.theta());
          double a = 0.0;
          while (std::abs(wrap_angle(r - a)) > nav.t_a) {
            const int dir = wrap_angle(r - a) >= 0 ? 1 : -1;
            const TickResult t = simulate_rotation_tick(truth, dir, nav, odo, odo_rng);
            truth = t.pose;
            a += t.odometry;
            record(NavEvent::kRotate);
          }
          p = estimate();
        }
        const double m = std::min(d, nav.max_step);
        double l = 0.0;
        // l < m stops a leg that overshoots a tolerance finer than one tick.
        while (std::abs(m - l) > t_leg && l < m) {
          const TickResult t = simulate_move_tick(truth, env.grid, nav, odo, odo_rng);
          truth = t.pose;
          if (t.collision) {
            record(NavEvent::kCollision);
            throw detail::NavAbort{NavStatus::kCollision, "footprint collision"};
          }
          l += t.odometry;
          record(NavEvent::kMove);
        }
        p = estimate();
        d = distance(w, p);
      }
      record(NavEvent::kWaypointReached);
    }
  } catch (const detail::NavAbort& abort) {
    result.status = abort.status;
    result.message = abort.message;
    if (abort.status != NavStatus::kCollision && tick < nav.max_ticks) record(NavEvent::kAbort);
    if (abort.status == NavStatus::kTickBudget && !result.trace.empty()) result.trace.back().event = NavEvent::kAbort;
  }
  result.report = closest_distance_metrics(result.trace, waypoints);
  if (result.status != NavStatus::kSuccess) result.report.success = false;
  return result;
}

// ---------------------------------------------------------------------------
// Files

inline constexpr const char* kTraceHeader = "tick,time,true_x,true_y,true_theta,est_x,est_y,est_theta,waypoint_idx,event";

inline std::string format_trace(const RouteTrace& trace, const std::string& provenance = {}) {
  std::string out;
  if (!provenance.empty()) out += "# " + provenance + "\n";
  out += std::string(kTraceHeader) + "\n";
  auto f = [](double v) { return textio::format_sig(v, 9); };
  for (const auto& t : trace) {
    out += std::to_string(t.tick) + "," + f(t.time) + "," + f(t.truth.x()) + "," + f(t.truth.y()) + "," +
           f(t.truth.theta()) + "," + f(t.estimate.pose.x()) + "," + f(t.estimate.pose.y()) + "," +
           f(t.estimate.pose.theta()) + "," + std::to_string(t.waypoint) + "," + to_string(t.event) + "\n";
  }
  return out;
}

inline RouteTrace parse_trace(std::istream& in, const std::string& source = "<trace>") {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  RouteTrace trace;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = textio::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      if (t != kTraceHeader) fail(ErrorKind::kParse, source + ":" + std::to_string(lineno) + ": expected trace header");
      header = true;
      continue;
    }
    const std::string ctx = source + ":" + std::to_string(lineno);
    const auto f = textio::split(t, ',');
    if (f.size() != 10) fail(ErrorKind::kParse, ctx + ": expected 10 columns");
    TraceTick tk;
    tk.tick = static_cast<long>(textio::parse_u64(f[0], ctx));
    tk.time = textio::parse_double(f[1], ctx);
    tk.truth = Pose2D(textio::parse_double(f[2], ctx), textio::parse_double(f[3], ctx), textio::parse_double(f[4], ctx));
    tk.estimate.pose =
        Pose2D(textio::parse_double(f[5], ctx), textio::parse_double(f[6], ctx), textio::parse_double(f[7], ctx));
    tk.waypoint = textio::parse_u64(f[8], ctx);
    tk.event = parse_nav_event(f[9]);
    trace.push_back(tk);
  }
  if (!header) fail(ErrorKind::kParse, source + ": missing trace header");
  return trace;
}

/// `x,y` per line; '#' starts a comment; an optional `x,y` header is skipped.
inline std::vector<Waypoint> parse_waypoints(std::istream& in, const std::string& source = "<waypoints>") {
  std::vector<Waypoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = textio::trim(line);
    if (t.empty()) continue;
    if (out.empty() && t == "x,y") continue;
    const auto f = textio::split(t, ',');
    const std::string ctx = source + ":" + std::to_string(lineno);
    if (f.size() != 2) fail(ErrorKind::kParse, ctx + ": expected 'x,y'");
    out.push_back({textio::parse_double(textio::trim(f[0]), ctx), textio::parse_double(textio::trim(f[1]), ctx)});
  }
  if (out.empty()) fail(ErrorKind::kParse, source + ": no waypoints");
  return out;
}

inline std::vector<Waypoint> load_waypoints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open waypoint file '" + path.string() + "'");
  return parse_waypoints(in, path.string());
}

}  // namespace neuromap
