#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuromap/error.hpp"

namespace neuromap {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update with bias correction. Weight decay is the coupled L2
/// form: weight_decay * param is added to the gradient before the moments.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s, double lr,
                      double weight_decay) {
  if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size())
    fail(ErrorKind::kConfiguration, "adam_step: shape mismatch");
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + weight_decay * params[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

/// How "a rate of r applied every N iterations" is read.
///  kPerIterationStaircase: lr0 * r^(N * floor(k / N))  (default)
///  kPerInterval:           lr0 * r^floor(k / N)
enum class DecayMode { kPerIterationStaircase, kPerInterval };

inline DecayMode parse_decay_mode(const std::string& s) {
  if (s == "staircase") return DecayMode::kPerIterationStaircase;
  if (s == "per-interval") return DecayMode::kPerInterval;
  fail(ErrorKind::kInvalidArgument, "unknown decay mode '" + s + "' (expected staircase|per-interval)");
}
inline const char* to_string(DecayMode m) { return m == DecayMode::kPerIterationStaircase ? "staircase" : "per-interval"; }

enum class LrPhase { kDecaying, kPostReset, kConverged };
enum class LrAction { kContinue, kReset, kConverged };

inline const char* to_string(LrAction a) {
  switch (a) {
    case LrAction::kContinue: return "continue";
    case LrAction::kReset: return "reset";
    case LrAction::kConverged: return "converged";
  }
  return "?";
}

struct LrTick {
  double lr;
  LrAction action;
};

/// Exponential staircase decay with plateau reset and convergence.
///
/// The no-improvement counter is measured in iterations since the last
/// improvement (or reset). When it reaches `patience` while decaying, the
/// rate and its decay clock restart from lr0 and the schedule enters the
/// post-reset phase; reaching it again there means convergence. Any
/// improvement returns the schedule to the decaying phase, so reset cycles
/// are unlimited. Lower metric values are better.
class LrSchedule {
 public:
  double lr0 = 1e-4;
  double decay_rate = 0.9998;
  long decay_interval = 1000;
  long eval_interval = 1000;
  long patience = 10000;
  DecayMode decay_mode = DecayMode::kPerIterationStaircase;
  double improvement_eps = 1e-12;

  LrTick tick(long iteration, std::optional<double> metric = std::nullopt) {
    if (iteration < 0 || (started_ && iteration <= last_iteration_))
      fail(ErrorKind::kContract, "lr_tick: iterations must be strictly increasing (got " + std::to_string(iteration) +
                                     " after " + std::to_string(last_iteration_) + ")");
    started_ = true;
    last_iteration_ = iteration;
    if (phase_ == LrPhase::kConverged) return {current_lr_, LrAction::kConverged};

    LrAction action = LrAction::kContinue;
    if (metric) {
      if (*metric < best_metric_ - improvement_eps) {
        best_metric_ = *metric;
        improvement_anchor_ = iteration;
        if (phase_ == LrPhase::kPostReset) phase_ = LrPhase::kDecaying;
      }
      iters_since_improvement_ = iteration - improvement_anchor_;
      if (iters_since_improvement_ >= patience) {
        if (phase_ == LrPhase::kDecaying) {
          action = LrAction::kReset;
          phase_ = LrPhase::kPostReset;
          reset_iteration_ = iteration;
          improvement_anchor_ = iteration;
          iters_since_improvement_ = 0;
        } else {
          phase_ = LrPhase::kConverged;
          current_lr_ = decayed(iteration);
          return {current_lr_, LrAction::kConverged};
        }
      }
    }
    current_lr_ = decayed(iteration);
    return {current_lr_, action};
  }

  LrPhase phase() const { return phase_; }
  double best_metric() const { return best_metric_; }
  long iters_since_improvement() const { return iters_since_improvement_; }
  double current_lr() const { return started_ ? current_lr_ : lr0; }
  long reset_iteration() const { return reset_iteration_; }

  /// Mutable state, exposed for checkpointing.
  struct State {
    LrPhase phase;
    double best_metric;
    long iters_since_improvement, improvement_anchor, reset_iteration, last_iteration;
    double current_lr;
    bool started;
  };
  State state() const {
    return {phase_, best_metric_, iters_since_improvement_, improvement_anchor_, reset_iteration_, last_iteration_,
            current_lr_, started_};
  }
  void restore(const State& s) {
    phase_ = s.phase;
    best_metric_ = s.best_metric;
    iters_since_improvement_ = s.iters_since_improvement;
    improvement_anchor_ = s.improvement_anchor;
    reset_iteration_ = s.reset_iteration;
    last_iteration_ = s.last_iteration;
    current_lr_ = s.current_lr;
    started_ = s.started;
  }

 private:
  double decayed(long iteration) const {
    const long k = iteration - reset_iteration_;
    const long stairs = k / decay_interval;
    const double exponent = decay_mode == DecayMode::kPerIterationStaircase
                                ? static_cast<double>(stairs) * static_cast<double>(decay_interval)
                                : static_cast<double>(stairs);
    return lr0 * std::pow(decay_rate, exponent);
  }

  LrPhase phase_ = LrPhase::kDecaying;
  double best_metric_ = std::numeric_limits<double>::infinity();
  long iters_since_improvement_ = 0;
  long improvement_anchor_ = 0;
  long reset_iteration_ = 0;
  long last_iteration_ = 0;
  double current_lr_ = 0.0;
  bool started_ = false;
};

}  // namespace neuromap
