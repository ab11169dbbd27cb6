#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "neuromap/capture.hpp"
#include "neuromap/error.hpp"
#include "neuromap/estimator.hpp"
#include "neuromap/pose.hpp"

namespace neuromap {

/// Pairwise summation in index order; the grouping is fixed so the result
/// does not depend on how the per-sample errors were computed.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) { return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size()); }

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct SampleError {
  double pos = 0.0;    // metres
  double theta = 0.0;  // degrees, [0, 180]
};

struct Metrics {
  double mean_pos_err = 0.0;
  double mean_theta_err = 0.0;
  double median_pos_err = 0.0;
  double median_theta_err = 0.0;
  std::vector<SampleError> per_sample;
};

inline SampleError pose_error(const Pose2D& estimate, const Pose2D& truth) {
  return {distance(estimate, truth), std::abs(ang_diff(estimate.theta(), truth.theta()))};
}

inline Metrics summarize(std::vector<SampleError> errors) {
  Metrics m;
  std::vector<double> pos, theta;
  pos.reserve(errors.size());
  theta.reserve(errors.size());
  for (const auto& e : errors) {
    pos.push_back(e.pos);
    theta.push_back(e.theta);
  }
  m.mean_pos_err = mean(pos);
  m.mean_theta_err = mean(theta);
  m.median_pos_err = median(pos);
  m.median_theta_err = median(theta);
  m.per_sample = std::move(errors);
  return m;
}

/// Runs the estimator over every test sample and reports position and
/// wrap-aware orientation errors.
inline Metrics evaluate(Estimator& estimator, const Dataset& testset, const EnvironmentSpec& env) {
  if (testset.empty()) fail(ErrorKind::kInvalidArgument, "evaluate: empty test set");
  if (!(testset.sensor == env.sensor))
    fail(ErrorKind::kConfiguration, "evaluate: test set sensor does not match environment '" + env.name + "'");
  std::vector<SampleError> errors;
  errors.reserve(testset.size());
  for (const Sample& s : testset.samples) {
    const PoseEstimate e = estimator.estimate(Frame{s.observation, s.pose});
    errors.push_back(pose_error(e.pose, s.pose));
  }
  return summarize(std::move(errors));
}

}  // namespace neuromap
