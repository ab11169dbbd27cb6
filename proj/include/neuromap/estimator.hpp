#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neuromap/capture.hpp"
#include "neuromap/error.hpp"
#include "neuromap/model.hpp"
#include "neuromap/pose.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

/// What an estimator is shown for one query. Only the oracle looks at
/// `truth`; every other estimator works from the observation alone.
struct Frame {
  const Observation& observation;
  Pose2D truth;
};

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual PoseEstimate estimate(const Frame& frame) = 0;
  virtual std::string name() const = 0;
  /// Observation length the estimator expects, if it has one.
  virtual std::optional<std::size_t> input_dim() const { return std::nullopt; }

 protected:
  void check_dim(const Observation& obs) const {
    if (auto d = input_dim(); d && *d != obs.size())
      fail(ErrorKind::kConfiguration, name() + ": observation has " + std::to_string(obs.size()) +
                                          " ranges, estimator expects " + std::to_string(*d));
  }
};

// ---------------------------------------------------------------------------
// Oracle

struct OracleConfig {
  double sigma_pos = 0.0;    // metres
  double sigma_theta = 0.0;  // degrees
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_pos >= 0.0) || !(sigma_theta >= 0.0)) fail(ErrorKind::kInvalidArgument, "OracleConfig: negative sigma");
  }
};

/// Ground truth plus Gaussian noise. Call i draws from stream (seed, i), so
/// the result is a function of the seed and the call index only.
inline PoseEstimate oracle_estimate(const Pose2D& truth, const OracleConfig& cfg, std::uint64_t call_index) {
  cfg.validate();
  Rng rng = Rng::stream(cfg.seed, call_index);
  const double ex = rng.normal();
  const double ey = rng.normal();
  const double et = rng.normal();
  return {Pose2D(truth.x() + cfg.sigma_pos * ex, truth.y() + cfg.sigma_pos * ey, truth.theta() + cfg.sigma_theta * et),
          false};
}

class OracleEstimator final : public Estimator {
 public:
  explicit OracleEstimator(OracleConfig cfg, std::optional<EnvBounds> bounds = std::nullopt)
      : cfg_(cfg), bounds_(bounds) {
    cfg_.validate();
  }

  PoseEstimate estimate(const Frame& frame) override {
    PoseEstimate e = oracle_estimate(frame.truth, cfg_, calls_++);
    if (bounds_) {
      const double x = std::clamp(e.pose.x(), bounds_->x_min, bounds_->x_max);
      const double y = std::clamp(e.pose.y(), bounds_->y_min, bounds_->y_max);
      if (x != e.pose.x() || y != e.pose.y()) {
        e.pose.set_position(x, y);
        e.clamped = true;
      }
    }
    return e;
  }
  std::string name() const override { return "oracle"; }
  std::uint64_t calls() const { return calls_; }

 private:
  OracleConfig cfg_;
  std::optional<EnvBounds> bounds_;
  std::uint64_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// k-nearest-neighbour lookup over a pose-labelled database

enum class KnnWeighting { kUniform, kInverseDistance };

inline KnnWeighting parse_weighting(const std::string& s) {
  if (s == "uniform") return KnnWeighting::kUniform;
  if (s == "idw" || s == "inverse-distance") return KnnWeighting::kInverseDistance;
  fail(ErrorKind::kInvalidArgument, "unknown k-NN weighting '" + s + "' (expected uniform|idw)");
}

struct KnnConfig {
  int k = 5;
  KnnWeighting weighting = KnnWeighting::kInverseDistance;
};

inline constexpr double kIdwEpsilon = 1e-9;

/// Database observations packed row-major for scanning.
class KnnIndex {
 public:
  explicit KnnIndex(const Dataset& db) {
    if (db.empty()) fail(ErrorKind::kInvalidArgument, "k-NN: empty database");
    dim_ = db.samples.front().observation.size();
    rows_.reserve(db.size() * dim_);
    for (const Sample& s : db.samples) {
      if (s.observation.size() != dim_) fail(ErrorKind::kConfiguration, "k-NN: ragged database observations");
      rows_.insert(rows_.end(), s.observation.ranges.begin(), s.observation.ranges.end());
      poses_.push_back(s.pose);
    }
  }

  std::size_t size() const { return poses_.size(); }
  std::size_t dim() const { return dim_; }

  /// (squared distance, index) of the k nearest rows; ties go to the lower index.
  std::vector<std::pair<double, std::size_t>> nearest(const Observation& obs, std::size_t k) const {
    if (obs.size() != dim_)
      fail(ErrorKind::kConfiguration, "k-NN: observation has " + std::to_string(obs.size()) + " ranges, database has " +
                                          std::to_string(dim_));
    std::vector<std::pair<double, std::size_t>> d(size());
    const double* q = obs.ranges.data();
    for (std::size_t i = 0; i < size(); ++i) {
      const double* row = rows_.data() + i * dim_;
      double acc = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) {
        const double diff = row[c] - q[c];
        acc += diff * diff;
      }
      d[i] = {acc, i};
    }
    k = std::min(k, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    d.resize(k);
    return d;
  }

  const Pose2D& pose(std::size_t i) const { return poses_[i]; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> rows_;
  std::vector<Pose2D> poses_;
};

inline PoseEstimate knn_estimate(const KnnIndex& index, const Observation& obs, const KnnConfig& cfg) {
  if (cfg.k < 1) fail(ErrorKind::kInvalidArgument, "k-NN: k must be >= 1");
  if (static_cast<std::size_t>(cfg.k) > index.size())
    fail(ErrorKind::kInvalidArgument, "k-NN: k exceeds database size");
  const auto nn = index.nearest(obs, static_cast<std::size_t>(cfg.k));
  std::vector<double> weights, thetas;
  double sx = 0.0, sy = 0.0, sw = 0.0;
  for (const auto& [d2, i] : nn) {
    const double w = cfg.weighting == KnnWeighting::kUniform ? 1.0 : 1.0 / (std::sqrt(d2) + kIdwEpsilon);
    const Pose2D& p = index.pose(i);
    sx += w * p.x();
    sy += w * p.y();
    sw += w;
    weights.push_back(w);
    thetas.push_back(p.theta());
  }
  return {Pose2D(sx / sw, sy / sw, circular_mean(thetas, weights)), false};
}

inline PoseEstimate knn_estimate(const Dataset& db, const Observation& obs, const KnnConfig& cfg) {
  return knn_estimate(KnnIndex(db), obs, cfg);
}

class KnnEstimator final : public Estimator {
 public:
  KnnEstimator(const Dataset& db, KnnConfig cfg) : index_(db), cfg_(cfg) {
    if (cfg_.k < 1 || static_cast<std::size_t>(cfg_.k) > index_.size())
      fail(ErrorKind::kInvalidArgument, "k-NN: k must be in [1, database size]");
  }
  PoseEstimate estimate(const Frame& frame) override {
    check_dim(frame.observation);
    return knn_estimate(index_, frame.observation, cfg_);
  }
  std::string name() const override { return "knn"; }
  std::optional<std::size_t> input_dim() const override { return index_.dim(); }

 private:
  KnnIndex index_;
  KnnConfig cfg_;
};

// ---------------------------------------------------------------------------
// Trained regressor

class RegressorEstimator final : public Estimator {
 public:
  RegressorEstimator(RegressorModel model, EnvBounds bounds) : model_(std::move(model)), bounds_(bounds) {}

  PoseEstimate estimate(const Frame& frame) override {
    check_dim(frame.observation);
    return denormalize(forward(model_, frame.observation), bounds_);
  }
  std::string name() const override { return "model"; }
  std::optional<std::size_t> input_dim() const override { return static_cast<std::size_t>(model_.input_dim()); }
  const RegressorModel& model() const { return model_; }

 private:
  RegressorModel model_;
  EnvBounds bounds_;
};

}  // namespace neuromap
