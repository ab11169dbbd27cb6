#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromap/error.hpp"
#include "neuromap/pose.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/textio.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

struct Sample {
  std::uint64_t id = 0;
  Observation observation;
  Pose2D pose;
};

struct Dataset {
  std::string env_name;
  SensorConfig sensor;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
  std::string provenance;  // invocation that produced the file, if any

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct WalkConfig {
  double capture_dist = 0.10;     // metres, strict '>'
  double capture_rot = 10.0;      // degrees, strict '>'
  double step_len = 0.10;         // metres per advance
  double clearance_radius = 0.5;  // footprint disc
  long max_steps = 5000;
  double retarget_prob = 0.2;     // chance per step of a fresh target heading
  double max_turn = 15.0;         // degrees per step
  int wedge_limit = 100;          // consecutive blocked advances before giving up

  void validate() const {
    if (!(capture_dist > 0 && capture_rot > 0 && step_len > 0 && clearance_radius >= 0 && max_turn > 0))
      fail(ErrorKind::kInvalidArgument, "WalkConfig: thresholds and step sizes must be positive");
    if (max_steps < 0) fail(ErrorKind::kInvalidArgument, "WalkConfig: max_steps must be >= 0");
    if (!(retarget_prob >= 0 && retarget_prob <= 1)) fail(ErrorKind::kInvalidArgument, "WalkConfig: retarget_prob outside [0, 1]");
    if (wedge_limit < 1) fail(ErrorKind::kInvalidArgument, "WalkConfig: wedge_limit must be >= 1");
  }
};

inline constexpr long kRejectionBudget = 1'000'000;

/// Uniform pose over the bounds, rejection-resampled until the position is
/// free. `attempts`, when given, receives the number of draws used.
inline Pose2D sample_random_pose(const EnvironmentSpec& env, Rng& rng, long* attempts = nullptr) {
  if (env.grid.occupied_count() == env.grid.cell_count())
    fail(ErrorKind::kInfeasible, "sample_random_pose: environment '" + env.name + "' has no free cell");
  const EnvBounds& b = env.bounds;
  for (long n = 1; n <= kRejectionBudget; ++n) {
    const double x = rng.uniform(b.x_min, b.x_max);
    const double y = rng.uniform(b.y_min, b.y_max);
    const double theta = 180.0 - 360.0 * rng.uniform();
    if (is_free(env.grid, x, y)) {
      if (attempts) *attempts = n;
      return Pose2D(x, y, theta);
    }
  }
  fail(ErrorKind::kInfeasible, "sample_random_pose: rejection budget exhausted");
}

/// Each sample i draws from its own stream (seed, i), so any sharding of the
/// index range yields the same dataset.
inline Dataset generate_dataset(const EnvironmentSpec& env, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::kInvalidArgument, "generate_dataset: n must be >= 1");
  Dataset d{env.name, env.sensor, seed, {}, {}};
  d.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, i);
    const Pose2D pose = sample_random_pose(env, rng);
    d.samples.push_back({i, raycast(env, pose), pose});
  }
  return d;
}

/// Accumulates path length and absolute rotation since the last capture and
/// fires when either strictly exceeds its threshold.
class CaptureTrigger {
 public:
  CaptureTrigger(double dist_threshold, double rot_threshold) : dist_thr_(dist_threshold), rot_thr_(rot_threshold) {}

  bool update(double advanced, double rotated_deg) {
    path_ += std::abs(advanced);
    rot_ += std::abs(rotated_deg);
    if (path_ > dist_thr_ || rot_ > rot_thr_) {
      last_path_ = path_;
      last_rot_ = rot_;
      path_ = rot_ = 0.0;
      return true;
    }
    return false;
  }

  double path() const { return path_; }
  double rotation() const { return rot_; }
  /// Accumulated values at the most recent capture.
  double captured_path() const { return last_path_; }
  double captured_rotation() const { return last_rot_; }

 private:
  double dist_thr_, rot_thr_;
  double path_ = 0.0, rot_ = 0.0;
  double last_path_ = 0.0, last_rot_ = 0.0;
};

struct WalkStep {
  long step = 0;
  Pose2D pose;
  double advanced = 0.0;
  double rotated = 0.0;
  double path_since_capture = 0.0;      // including this step
  double rotation_since_capture = 0.0;  // including this step
  bool captured = false;
};

struct WalkResult {
  Dataset dataset;
  std::vector<WalkStep> log;
  bool wedged = false;
};

/// Random-walk traversal with threshold-triggered capture. The start pose is
/// always captured as sample 0.
inline WalkResult random_walk_capture(const EnvironmentSpec& env, const WalkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const EnvBounds& b = env.bounds;

  Pose2D pose;
  bool found = false;
  for (long n = 0; n < kRejectionBudget && !found; ++n) {
    const double x = rng.uniform(b.x_min, b.x_max);
    const double y = rng.uniform(b.y_min, b.y_max);
    const double theta = 180.0 - 360.0 * rng.uniform();
    const Pose2D cand(x, y, theta);
    if (footprint_free(env.grid, cand, cfg.clearance_radius)) {
      pose = cand;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::kInfeasible, "random_walk_capture: no footprint-free start pose in '" + env.name + "'");

  WalkResult result;
  result.dataset = Dataset{env.name, env.sensor, seed, {}, {}};
  auto capture = [&] {
    const auto id = static_cast<std::uint64_t>(result.dataset.samples.size());
    result.dataset.samples.push_back({id, raycast(env, pose), pose});
  };
  capture();

  CaptureTrigger trigger(cfg.capture_dist, cfg.capture_rot);
  double target = pose.theta();
  int blocked = 0;
  // While blocked the walk turns back toward the reverse of its last
  // successful move, which is known to be free; random retargeting is
  // suspended until it advances again.
  std::optional<double> last_move;
  bool escaping = false;
  for (long step = 0; step < cfg.max_steps; ++step) {
    const bool retarget = rng.uniform() < cfg.retarget_prob;
    if (retarget && !escaping) target = 180.0 - 360.0 * rng.uniform();
    const double turn = std::clamp(ang_diff(target, pose.theta()), -cfg.max_turn, cfg.max_turn);
    pose.rotate(turn);

    const double rad = deg2rad(pose.theta());
    const Pose2D next(pose.x() + cfg.step_len * std::cos(rad), pose.y() + cfg.step_len * std::sin(rad), pose.theta());
    double advanced = 0.0;
    if (footprint_free(env.grid, next, cfg.clearance_radius)) {
      pose = next;
      advanced = cfg.step_len;
      blocked = 0;
      escaping = false;
      last_move = pose.theta();
    } else {
      ++blocked;
      if (last_move) {
        if (!escaping) target = wrap_angle(*last_move + 180.0);
        escaping = true;
      } else {
        target = 180.0 - 360.0 * rng.uniform();
      }
    }

    WalkStep entry{step, pose, advanced, turn, trigger.path() + advanced, trigger.rotation() + std::abs(turn), false};
    entry.captured = trigger.update(advanced, turn);
    if (entry.captured) capture();
    result.log.push_back(entry);

    if (blocked >= cfg.wedge_limit) {
      result.wedged = true;
      break;
    }
  }
  return result;
}

/// Seeded disjoint split into (train, test). Relative order is preserved and
/// both halves are renumbered densely from 0.
inline std::pair<Dataset, Dataset> split(const Dataset& d, std::size_t test_n, std::uint64_t seed) {
  if (test_n > 0 && test_n >= d.size())
    fail(ErrorKind::kInvalidArgument, "split: test_n must be smaller than the dataset size");
  Dataset train{d.env_name, d.sensor, d.seed, {}, d.provenance};
  Dataset test{d.env_name, d.sensor, d.seed, {}, d.provenance};
  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(perm.begin(), perm.end(), rng);
  std::vector<bool> in_test(d.size(), false);
  for (std::size_t k = 0; k < test_n; ++k) in_test[perm[k]] = true;
  for (std::size_t i = 0; i < d.size(); ++i) {
    Dataset& dst = in_test[i] ? test : train;
    Sample s = d.samples[i];
    s.id = dst.samples.size();
    dst.samples.push_back(std::move(s));
  }
  return {std::move(train), std::move(test)};
}

/// First n samples; a prefix of an i.i.d. dataset is itself i.i.d.
inline Dataset head(const Dataset& d, std::size_t n) {
  Dataset out{d.env_name, d.sensor, d.seed, {}, d.provenance};
  out.samples.assign(d.samples.begin(), d.samples.begin() + static_cast<std::ptrdiff_t>(std::min(n, d.size())));
  return out;
}

inline constexpr const char* kDatasetMagic = "#neuromap-dataset v1";
inline constexpr int kDatasetDigits = 9;

/// Theta is printed so that a rounded "-180" never appears; it would not
/// survive the (-180, 180] wrap on reload.
inline std::string format_theta(double theta, int digits) {
  std::string s = textio::format_sig(theta, digits);
  if (s == "-180") s = "180";
  return s;
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  nlohmann::ordered_json header;
  header["env_name"] = d.env_name;
  header["seed"] = d.seed;
  header["fov"] = d.sensor.fov;
  header["ray_count"] = d.sensor.ray_count;
  header["max_range"] = d.sensor.max_range;
  header["n"] = d.samples.size();
  if (!d.provenance.empty()) header["provenance"] = d.provenance;
  out << kDatasetMagic << '\n' << header.dump() << '\n';
  std::string line;
  for (const Sample& s : d.samples) {
    line.clear();
    line += std::to_string(s.id);
    line += ',';
    line += textio::format_sig(s.pose.x(), kDatasetDigits);
    line += ',';
    line += textio::format_sig(s.pose.y(), kDatasetDigits);
    line += ',';
    line += format_theta(s.pose.theta(), kDatasetDigits);
    for (double r : s.observation.ranges) {
      line += ',';
      line += textio::format_sig(r, kDatasetDigits);
    }
    line += '\n';
    out << line;
  }
}

inline Dataset read_dataset(std::istream& in, const std::string& source = "<dataset>") {
  auto where = [&](std::size_t n) { return source + ":" + std::to_string(n); };
  std::string line;
  if (!std::getline(in, line) || textio::trim(line) != kDatasetMagic)
    fail(ErrorKind::kParse, where(1) + ": not a neuromap dataset (expected '" + std::string(kDatasetMagic) + "')");
  if (!std::getline(in, line)) fail(ErrorKind::kParse, where(2) + ": missing JSON header");

  Dataset d;
  std::size_t n = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    d.env_name = header.at("env_name").get<std::string>();
    d.seed = header.at("seed").get<std::uint64_t>();
    d.sensor.fov = header.at("fov").get<double>();
    d.sensor.ray_count = header.at("ray_count").get<int>();
    d.sensor.max_range = header.at("max_range").get<double>();
    n = header.at("n").get<std::size_t>();
    if (header.contains("provenance")) d.provenance = header.at("provenance").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, where(2) + ": bad dataset header: " + e.what());
  }
  try {
    d.sensor.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kParse, where(2) + ": " + e.what());
  }

  const std::size_t arity = 4 + static_cast<std::size_t>(d.sensor.ray_count);
  d.samples.reserve(n);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (textio::trim(line).empty()) continue;
    const auto fields = textio::split(textio::trim(line), ',');
    const std::string ctx = where(lineno);
    if (fields.size() != arity)
      fail(ErrorKind::kParse, ctx + ": row has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(arity));
    Sample s;
    s.id = textio::parse_u64(fields[0], ctx);
    if (s.id != d.samples.size()) fail(ErrorKind::kParse, ctx + ": sample ids must be dense and ordered");
    const double x = textio::parse_double(fields[1], ctx);
    const double y = textio::parse_double(fields[2], ctx);
    const double t = textio::parse_double(fields[3], ctx);
    s.pose = Pose2D(x, y, t);
    s.observation.ranges.resize(arity - 4);
    for (std::size_t k = 4; k < arity; ++k) {
      const double r = textio::parse_double(fields[k], ctx);
      if (r < 0.0 || r > 1.0) fail(ErrorKind::kParse, ctx + ": range value outside [0, 1]");
      s.observation.ranges[k - 4] = r;
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.size() != n)
    fail(ErrorKind::kParse, source + ": header declares " + std::to_string(n) + " samples, found " + std::to_string(d.samples.size()));
  return d;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write dataset '" + path.string() + "'");
  write_dataset(out, d);
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open dataset '" + path.string() + "'");
  return read_dataset(in, path.string());
}

inline std::string dataset_to_string(const Dataset& d) {
  std::ostringstream out;
  write_dataset(out, d);
  return out.str();
}

}  // namespace neuromap
