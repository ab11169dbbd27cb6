#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "neuromap/error.hpp"
#include "neuromap/pose.hpp"

namespace neuromap {

/// Boolean occupancy raster. Row 0 is the bottom row (minimum y); cell (i, j)
/// covers [origin_x + i*res, origin_x + (i+1)*res) x [origin_y + j*res, ...).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, double origin_x = 0.0, double origin_y = 0.0)
      : width_(width), height_(height), resolution_(resolution), origin_x_(origin_x), origin_y_(origin_y) {
    if (width < 1 || height < 1) fail(ErrorKind::kInvalidArgument, "OccupancyGrid: width and height must be >= 1");
    if (!(resolution > 0.0) || !std::isfinite(resolution))
      fail(ErrorKind::kInvalidArgument, "OccupancyGrid: resolution must be positive");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y))
      fail(ErrorKind::kInvalidArgument, "OccupancyGrid: non-finite origin");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }

  EnvBounds bounds() const {
    return {origin_x_, origin_x_ + width_ * resolution_, origin_y_, origin_y_ + height_ * resolution_};
  }

  bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }

  bool occupied(int i, int j) const { return cells_[index(i, j)] != 0; }
  void set_occupied(int i, int j, bool occ = true) { cells_[index(i, j)] = occ ? 1 : 0; }

  /// Marks every cell whose centre lies inside [x0, x1] x [y0, y1].
  void fill_rect(double x0, double y0, double x1, double y1, bool occ = true) {
    for (int j = 0; j < height_; ++j)
      for (int i = 0; i < width_; ++i) {
        const double cx = origin_x_ + (i + 0.5) * resolution_;
        const double cy = origin_y_ + (j + 0.5) * resolution_;
        if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) set_occupied(i, j, occ);
      }
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto c : cells_) n += c;
    return n;
  }
  std::size_t cell_count() const { return cells_.size(); }

  /// Cell index along x for a metric coordinate (floor convention, unclamped).
  int cell_x(double x) const { return static_cast<int>(std::floor((x - origin_x_) / resolution_)); }
  int cell_y(double y) const { return static_cast<int>(std::floor((y - origin_y_) / resolution_)); }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(i);
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<std::uint8_t> cells_;
};

struct SensorConfig {
  double fov = 120.0;        // degrees, (0, 360]
  int ray_count = 96;
  double max_range = 20.0;   // metres

  void validate() const {
    if (!(fov > 0.0 && fov <= 360.0)) fail(ErrorKind::kInvalidArgument, "SensorConfig: fov must be in (0, 360]");
    if (ray_count < 1 || (fov < 360.0 && ray_count < 2))
      fail(ErrorKind::kInvalidArgument, "SensorConfig: ray_count must be >= 2 (>= 1 for a full circle)");
    if (!(max_range > 0.0) || !std::isfinite(max_range))
      fail(ErrorKind::kInvalidArgument, "SensorConfig: max_range must be positive");
  }

  /// Bearing of ray i relative to the sensor heading, in degrees.
  double ray_offset(int i) const {
    if (fov >= 360.0) return -180.0 + i * (360.0 / ray_count);
    return -fov / 2.0 + i * (fov / (ray_count - 1));
  }

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

/// Normalised ray ranges: hit distance / max_range, 1.0 meaning no hit.
struct Observation {
  std::vector<double> ranges;

  std::size_t size() const { return ranges.size(); }
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct EnvironmentSpec {
  std::string name;
  EnvBounds bounds;
  OccupancyGrid grid;
  SensorConfig sensor;

  void validate() const {
    if (name.empty()) fail(ErrorKind::kInvalidArgument, "EnvironmentSpec: empty name");
    if (!(bounds == grid.bounds())) fail(ErrorKind::kInvalidArgument, "EnvironmentSpec: bounds disagree with grid");
    sensor.validate();
  }
};

inline EnvironmentSpec make_environment(std::string name, OccupancyGrid grid, SensorConfig sensor = {}) {
  EnvironmentSpec env{std::move(name), grid.bounds(), std::move(grid), sensor};
  env.validate();
  return env;
}

/// Parses the text grid format. `source` names the input in error messages.
inline OccupancyGrid parse_grid(std::istream& in, const std::string& source = "<grid>") {
  std::string line;
  int lineno = 0;
  auto where = [&](int n) { return source + ":" + std::to_string(n) + ": "; };

  if (!std::getline(in, line)) fail(ErrorKind::kParse, where(1) + "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream hs(line);
  long long w = 0, h = 0;
  double res = 0, ox = 0, oy = 0;
  std::string extra;
  if (!(hs >> w >> h >> res >> ox >> oy) || (hs >> extra))
    fail(ErrorKind::kParse, where(1) + "header must be 'width height resolution origin_x origin_y'");
  if (w < 1 || h < 1 || w > 100000 || h > 100000) fail(ErrorKind::kParse, where(1) + "bad grid dimensions");
  if (!(res > 0.0) || !std::isfinite(res) || !std::isfinite(ox) || !std::isfinite(oy))
    fail(ErrorKind::kParse, where(1) + "bad resolution or origin");

  OccupancyGrid grid(static_cast<int>(w), static_cast<int>(h), res, ox, oy);
  for (long long r = 0; r < h; ++r) {
    if (!std::getline(in, line)) fail(ErrorKind::kParse, where(lineno + 1) + "missing grid row (expected " + std::to_string(h) + " rows)");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<long long>(line.size()) != w)
      fail(ErrorKind::kParse, where(lineno) + "row has " + std::to_string(line.size()) + " cells, expected " + std::to_string(w));
    const int j = static_cast<int>(h - 1 - r);  // first body line is the top row
    for (long long i = 0; i < w; ++i) {
      const char c = line[static_cast<std::size_t>(i)];
      if (c == '#')
        grid.set_occupied(static_cast<int>(i), j);
      else if (c != '.')
        fail(ErrorKind::kParse, where(lineno) + "unknown cell character '" + std::string(1, c) + "'");
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) fail(ErrorKind::kParse, where(lineno) + "unexpected content after last grid row");
  }
  return grid;
}

inline std::string format_grid(const OccupancyGrid& g) {
  std::ostringstream out;
  out.precision(17);
  out << g.width() << ' ' << g.height() << ' ' << g.resolution() << ' ' << g.origin_x() << ' ' << g.origin_y() << '\n';
  for (int j = g.height() - 1; j >= 0; --j) {
    for (int i = 0; i < g.width(); ++i) out << (g.occupied(i, j) ? '#' : '.');
    out << '\n';
  }
  return out.str();
}

inline EnvironmentSpec load_environment(const std::filesystem::path& path, SensorConfig sensor = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open environment file '" + path.string() + "'");
  OccupancyGrid grid = parse_grid(in, path.string());
  std::string name = path.stem().string();
  if (name.empty()) name = "env";
  return make_environment(std::move(name), std::move(grid), sensor);
}

/// False outside the grid or inside an occupied cell.
inline bool is_free(const OccupancyGrid& grid, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  const double fx = std::floor((x - grid.origin_x()) / grid.resolution());
  const double fy = std::floor((y - grid.origin_y()) / grid.resolution());
  if (fx < 0 || fy < 0 || fx >= grid.width() || fy >= grid.height()) return false;
  return !grid.occupied(static_cast<int>(fx), static_cast<int>(fy));
}

/// True iff the open disc of `radius` around the pose lies inside the bounds
/// and overlaps no occupied cell. Radius 0 reduces to is_free.
inline bool footprint_free(const OccupancyGrid& grid, const Pose2D& pose, double radius) {
  if (!(radius >= 0.0)) fail(ErrorKind::kInvalidArgument, "footprint_free: negative radius");
  const double x = pose.x(), y = pose.y();
  if (radius == 0.0) return is_free(grid, x, y);
  const EnvBounds b = grid.bounds();
  if (x - radius < b.x_min || x + radius > b.x_max || y - radius < b.y_min || y + radius > b.y_max) return false;
  if (!is_free(grid, x, y)) return false;
  const double res = grid.resolution();
  const int i0 = std::max(0, grid.cell_x(x - radius));
  const int i1 = std::min(grid.width() - 1, grid.cell_x(x + radius));
  const int j0 = std::max(0, grid.cell_y(y - radius));
  const int j1 = std::min(grid.height() - 1, grid.cell_y(y + radius));
  const double r2 = radius * radius;
  for (int j = j0; j <= j1; ++j) {
    const double cy0 = grid.origin_y() + j * res;
    const double dy = std::max({cy0 - y, 0.0, y - (cy0 + res)});
    for (int i = i0; i <= i1; ++i) {
      if (!grid.occupied(i, j)) continue;
      const double cx0 = grid.origin_x() + i * res;
      const double dx = std::max({cx0 - x, 0.0, x - (cx0 + res)});
      if (dx * dx + dy * dy < r2) return false;
    }
  }
  return true;
}

/// Distance in metres along a ray to the first occupied cell or the grid
/// boundary, capped at max_range. Exact cell traversal (Amanatides & Woo).
inline double cast_ray(const OccupancyGrid& grid, double x, double y, double bearing_deg, double max_range) {
  const double rad = deg2rad(bearing_deg);
  const double dx = std::cos(rad);
  const double dy = std::sin(rad);
  const double res = grid.resolution();
  const double lx = (x - grid.origin_x()) / res;  // position in cell units
  const double ly = (y - grid.origin_y()) / res;
  int i = static_cast<int>(std::floor(lx));
  int j = static_cast<int>(std::floor(ly));
  if (!grid.in_grid(i, j) || grid.occupied(i, j)) return 0.0;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int step_i = dx > 0 ? 1 : -1;
  const int step_j = dy > 0 ? 1 : -1;
  // t is measured in metres along the ray.
  const double t_delta_x = dx != 0.0 ? res / std::abs(dx) : kInf;
  const double t_delta_y = dy != 0.0 ? res / std::abs(dy) : kInf;
  double t_max_x = kInf, t_max_y = kInf;
  if (dx > 0)
    t_max_x = (std::floor(lx) + 1.0 - lx) * res / dx;
  else if (dx < 0)
    t_max_x = (lx - std::floor(lx)) * res / -dx;
  if (dy > 0)
    t_max_y = (std::floor(ly) + 1.0 - ly) * res / dy;
  else if (dy < 0)
    t_max_y = (ly - std::floor(ly)) * res / -dy;

  for (;;) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      i += step_i;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      j += step_j;
      t_max_y += t_delta_y;
    }
    if (t >= max_range) return max_range;
    if (!grid.in_grid(i, j) || grid.occupied(i, j)) return t;
  }
}

/// Synthesises the range observation seen from `pose`.
inline Observation raycast(const OccupancyGrid& grid, const Pose2D& pose, const SensorConfig& sensor) {
  sensor.validate();
  if (!is_free(grid, pose.x(), pose.y())) fail(ErrorKind::kInvalidArgument, "raycast: pose is not in free space");
  Observation obs;
  obs.ranges.resize(static_cast<std::size_t>(sensor.ray_count));
  for (int i = 0; i < sensor.ray_count; ++i) {
    const double d = cast_ray(grid, pose.x(), pose.y(), pose.theta() + sensor.ray_offset(i), sensor.max_range);
    obs.ranges[static_cast<std::size_t>(i)] = std::min(d, sensor.max_range) / sensor.max_range;
  }
  return obs;
}

inline Observation raycast(const EnvironmentSpec& env, const Pose2D& pose) { return raycast(env.grid, pose, env.sensor); }

}  // namespace neuromap
