#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromap/capture.hpp"
#include "neuromap/error.hpp"
#include "neuromap/metrics.hpp"
#include "neuromap/model.hpp"
#include "neuromap/optim.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/textio.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

struct TrainConfig {
  std::size_t batch_size = 32;
  double weight_decay = 1e-6;
  std::uint64_t seed = 0;
  long eval_interval = 1000;
  long max_iterations = 200000;
  std::vector<int> hidden = {64, 64};
  double val_fraction = 0.1;
  LossKind loss = LossKind::kL1;
  YawMode yaw_mode = YawMode::kAngle;
  double lr0 = 1e-4;
  double decay_rate = 0.9998;
  long decay_interval = 1000;
  long patience = 10000;
  DecayMode decay_mode = DecayMode::kPerIterationStaircase;

  void validate() const {
    if (batch_size < 1) fail(ErrorKind::kInvalidArgument, "TrainConfig: batch_size must be >= 1");
    if (eval_interval < 1 || decay_interval < 1 || patience < 1)
      fail(ErrorKind::kInvalidArgument, "TrainConfig: intervals and patience must be >= 1");
    if (max_iterations < 0) fail(ErrorKind::kInvalidArgument, "TrainConfig: max_iterations must be >= 0");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail(ErrorKind::kInvalidArgument, "TrainConfig: val_fraction must be in (0, 1)");
    if (!(lr0 > 0.0) || !(decay_rate > 0.0) || !(weight_decay >= 0.0))
      fail(ErrorKind::kInvalidArgument, "TrainConfig: lr0 and decay_rate must be positive, weight_decay non-negative");
    for (int h : hidden)
      if (h < 1) fail(ErrorKind::kInvalidArgument, "TrainConfig: hidden widths must be positive");
  }

  LrSchedule schedule() const {
    LrSchedule s;
    s.lr0 = lr0;
    s.decay_rate = decay_rate;
    s.decay_interval = decay_interval;
    s.eval_interval = eval_interval;
    s.patience = patience;
    s.decay_mode = decay_mode;
    return s;
  }
};

struct HistoryRow {
  long iteration = 0;
  double lr = 0.0;
  double val_pos_err = 0.0;
  double val_theta_err = 0.0;
  std::string event;  // eval | reset | converged | final
};

struct TrainResult {
  RegressorModel model;  // best validation model
  std::vector<HistoryRow> history;
  long iterations = 0;
  bool converged = false;
  double best_val_pos_err = std::numeric_limits<double>::infinity();
};

/// Normalised inputs/targets for a set of samples.
struct TrainingSet {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  std::vector<Pose2D> poses;

  TrainingSet(const Dataset& d, const EnvBounds& b, YawMode mode) {
    for (const Sample& s : d.samples) {
      inputs.push_back(s.observation.ranges);
      targets.push_back(pose_to_target(normalize(s.pose, b), mode));
      poses.push_back(s.pose);
    }
  }
  std::size_t size() const { return inputs.size(); }
};

/// Position / orientation error of a model over a sample set.
inline Metrics model_metrics(const RegressorModel& m, const TrainingSet& set, const EnvBounds& b) {
  std::vector<SampleError> errors;
  errors.reserve(set.size());
  ForwardCache cache;
  for (std::size_t i = 0; i < set.size(); ++i) {
    forward_into(m, set.inputs[i], cache);
    const Pose2D est = denormalize(head_to_pose(cache.acts.back(), m.yaw_mode()), b).pose;
    errors.push_back(pose_error(est, set.poses[i]));
  }
  return summarize(std::move(errors));
}

/// Minibatch Adam training with the plateau-reset learning-rate schedule.
///
/// Iteration i (0-based) first ticks the schedule, evaluating validation
/// mean position error when i is a positive multiple of eval_interval, and
/// then applies one minibatch update. The loop stops on convergence or after
/// max_iterations updates.
class Trainer {
 public:
  using EvalCallback = std::function<void(const Trainer&, const HistoryRow&)>;

  Trainer(const Dataset& data, const EnvironmentSpec& env, TrainConfig cfg)
      : cfg_(std::move(cfg)), bounds_(env.bounds), sched_(cfg_.schedule()) {
    cfg_.validate();
    if (!(data.sensor == env.sensor)) fail(ErrorKind::kConfiguration, "train: dataset sensor does not match environment");
    const auto val_n = static_cast<std::size_t>(std::llround(cfg_.val_fraction * static_cast<double>(data.size())));
    if (data.size() < cfg_.batch_size + 1 || val_n < 1 || data.size() - val_n < cfg_.batch_size)
      fail(ErrorKind::kInvalidArgument, "train: dataset too small (" + std::to_string(data.size()) + " samples) for batch size " +
                                            std::to_string(cfg_.batch_size) + " plus a validation split");
    Rng split_rng = Rng::stream(cfg_.seed, 2);
    auto [train_part, val_part] = split(data, val_n, split_rng.next());
    train_ = std::make_unique<TrainingSet>(train_part, bounds_, cfg_.yaw_mode);
    val_ = std::make_unique<TrainingSet>(val_part, bounds_, cfg_.yaw_mode);

    std::vector<int> dims{static_cast<int>(data.sensor.ray_count)};
    dims.insert(dims.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    dims.push_back(static_cast<int>(output_dim(cfg_.yaw_mode)));
    model_ = RegressorModel(dims, cfg_.yaw_mode);
    Rng init = Rng::stream(cfg_.seed, 0);
    model_.init_random(init);
    best_ = model_;
    adam_ = AdamState(model_.param_count());
    grad_.assign(model_.param_count(), 0.0);
    rng_ = Rng::stream(cfg_.seed, 1);
    order_.resize(train_->size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    cursor_ = order_.size();  // forces a shuffle on the first batch
  }

  /// Runs to convergence or max_iterations. `on_eval` is called after every
  /// validation pass.
  TrainResult run(const EvalCallback& on_eval = {}) {
    while (!done_) step_once(on_eval);
    TrainResult r;
    r.model = best_;
    r.history = history_;
    r.iterations = iteration_;
    r.converged = converged_;
    r.best_val_pos_err = best_metric_;
    return r;
  }

  bool done() const { return done_; }
  long iteration() const { return iteration_; }
  const RegressorModel& model() const { return model_; }
  const RegressorModel& best_model() const { return best_; }
  const std::vector<HistoryRow>& history() const { return history_; }
  const TrainingSet& validation_set() const { return *val_; }
  const TrainConfig& config() const { return cfg_; }
  const EnvBounds& bounds() const { return bounds_; }

  // -- checkpointing -------------------------------------------------------

  nlohmann::json checkpoint() const {
    nlohmann::json j;
    j["format"] = "neuromap-checkpoint v1";
    j["seed"] = cfg_.seed;
    j["layer_dims"] = model_.layer_dims();
    j["iteration"] = iteration_;
    j["ticked"] = ticked_;
    j["tick_lr"] = tick_lr_;
    j["done"] = done_;
    j["converged"] = converged_;
    j["params"] = std::vector<double>(model_.params().begin(), model_.params().end());
    j["best_params"] = std::vector<double>(best_.params().begin(), best_.params().end());
    j["best_metric"] = std::isfinite(best_metric_) ? nlohmann::json(best_metric_) : nlohmann::json(nullptr);
    j["adam"] = {{"m", adam_.m}, {"v", adam_.v}, {"t", adam_.t}};
    const auto s = sched_.state();
    j["schedule"] = {{"phase", static_cast<int>(s.phase)},
                     {"best_metric", std::isfinite(s.best_metric) ? nlohmann::json(s.best_metric) : nlohmann::json(nullptr)},
                     {"iters_since_improvement", s.iters_since_improvement},
                     {"improvement_anchor", s.improvement_anchor},
                     {"reset_iteration", s.reset_iteration},
                     {"last_iteration", s.last_iteration},
                     {"current_lr", s.current_lr},
                     {"started", s.started}};
    j["rng"] = std::vector<std::uint64_t>(rng_.state(), rng_.state() + 4);
    j["order"] = order_;
    j["cursor"] = cursor_;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : history_) hist.push_back({h.iteration, h.lr, h.val_pos_err, h.val_theta_err, h.event});
    j["history"] = hist;
    return j;
  }

  /// Restores state saved by checkpoint(); the trainer must have been built
  /// from the same dataset, environment and config.
  void restore(const nlohmann::json& j) {
    try {
      if (j.at("format") != "neuromap-checkpoint v1") fail(ErrorKind::kParse, "checkpoint: unknown format");
      if (j.at("seed").get<std::uint64_t>() != cfg_.seed || j.at("layer_dims").get<std::vector<int>>() != model_.layer_dims())
        fail(ErrorKind::kConfiguration, "checkpoint: seed or architecture differs from the current config");
      auto load_params = [](const nlohmann::json& src, RegressorModel& m) {
        const auto v = src.get<std::vector<double>>();
        if (v.size() != m.param_count()) fail(ErrorKind::kParse, "checkpoint: parameter count mismatch");
        std::copy(v.begin(), v.end(), m.params().begin());
      };
      iteration_ = j.at("iteration").get<long>();
      ticked_ = j.at("ticked").get<long>();
      tick_lr_ = j.at("tick_lr").get<double>();
      done_ = j.at("done").get<bool>();
      converged_ = j.at("converged").get<bool>();
      load_params(j.at("params"), model_);
      load_params(j.at("best_params"), best_);
      best_metric_ = j.at("best_metric").is_null() ? std::numeric_limits<double>::infinity() : j.at("best_metric").get<double>();
      adam_.m = j.at("adam").at("m").get<std::vector<double>>();
      adam_.v = j.at("adam").at("v").get<std::vector<double>>();
      adam_.t = j.at("adam").at("t").get<std::uint64_t>();
      const auto& s = j.at("schedule");
      LrSchedule::State st{};
      st.phase = static_cast<LrPhase>(s.at("phase").get<int>());
      st.best_metric = s.at("best_metric").is_null() ? std::numeric_limits<double>::infinity() : s.at("best_metric").get<double>();
      st.iters_since_improvement = s.at("iters_since_improvement").get<long>();
      st.improvement_anchor = s.at("improvement_anchor").get<long>();
      st.reset_iteration = s.at("reset_iteration").get<long>();
      st.last_iteration = s.at("last_iteration").get<long>();
      st.current_lr = s.at("current_lr").get<double>();
      st.started = s.at("started").get<bool>();
      sched_.restore(st);
      const auto r = j.at("rng").get<std::vector<std::uint64_t>>();
      if (r.size() != 4) fail(ErrorKind::kParse, "checkpoint: bad rng state");
      const std::uint64_t raw[4] = {r[0], r[1], r[2], r[3]};
      rng_.set_state(raw);
      order_ = j.at("order").get<std::vector<std::size_t>>();
      cursor_ = j.at("cursor").get<std::size_t>();
      history_.clear();
      for (const auto& h : j.at("history"))
        history_.push_back({h.at(0).get<long>(), h.at(1).get<double>(), h.at(2).get<double>(), h.at(3).get<double>(),
                            h.at(4).get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kParse, std::string("checkpoint: ") + e.what());
    }
  }

 private:
  void step_once(const EvalCallback& on_eval) {
    const long i = iteration_;
    // A checkpoint written from the eval callback already holds the tick for
    // iteration i; resuming from it goes straight to the update.
    if (ticked_ != i) {
      const bool boundary = i > 0 && i % cfg_.eval_interval == 0;
      std::optional<double> metric;
      Metrics val;
      if (boundary) {
        val = evaluate();
        metric = val.mean_pos_err;
      }
      const LrTick t = sched_.tick(i, metric);
      ticked_ = i;
      tick_lr_ = t.lr;
      bool row = false;
      if (boundary) {
        const char* event = t.action == LrAction::kReset ? "reset" : t.action == LrAction::kConverged ? "converged" : "eval";
        history_.push_back({i, t.lr, val.mean_pos_err, val.mean_theta_err, event});
        row = true;
      }
      if (t.action == LrAction::kConverged) {
        converged_ = true;
        done_ = true;
      } else if (i >= cfg_.max_iterations) {
        if (!boundary) {
          val = evaluate();
          history_.push_back({i, t.lr, val.mean_pos_err, val.mean_theta_err, "final"});
          row = true;
        }
        done_ = true;
      }
      if (row && on_eval) on_eval(*this, history_.back());
      if (done_) return;
    }

    batch_.clear();
    for (std::size_t k = 0; k < cfg_.batch_size; ++k) {
      if (cursor_ >= order_.size()) {
        shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
      }
      const std::size_t idx = order_[cursor_++];
      batch_.push_back({train_->inputs[idx], train_->targets[idx]});
    }
    const double loss = backward(model_, batch_, grad_, cfg_.loss);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at iteration " << i << " (lr " << tick_lr_ << ")";
      fail(ErrorKind::kRuntime, msg.str());
    }
    adam_step(model_.params(), grad_, adam_, tick_lr_, cfg_.weight_decay);
    if (!model_.all_finite()) fail(ErrorKind::kRuntime, "train: non-finite parameters at iteration " + std::to_string(i));
    ++iteration_;
  }

  Metrics evaluate() {
    Metrics val = model_metrics(model_, *val_, bounds_);
    if (val.mean_pos_err < best_metric_) {
      best_metric_ = val.mean_pos_err;
      best_ = model_;
    }
    return val;
  }

  TrainConfig cfg_;
  EnvBounds bounds_;
  LrSchedule sched_;
  std::unique_ptr<TrainingSet> train_, val_;
  RegressorModel model_, best_;
  AdamState adam_;
  std::vector<double> grad_;
  std::vector<BatchItem> batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  long iteration_ = 0;
  long ticked_ = -1;
  double tick_lr_ = 0.0;
  bool done_ = false;
  bool converged_ = false;
  double best_metric_ = std::numeric_limits<double>::infinity();
  std::vector<HistoryRow> history_;
};

inline TrainResult train(const Dataset& data, const EnvironmentSpec& env, const TrainConfig& cfg) {
  return Trainer(data, env, cfg).run();
}

inline constexpr const char* kHistoryHeader = "iteration,lr,val_pos_err,val_theta_err,event";

inline std::string format_history(const std::vector<HistoryRow>& rows) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration) + "," + textio::format_sig(r.lr, 12) + "," + textio::format_sig(r.val_pos_err, 9) +
           "," + textio::format_sig(r.val_theta_err, 9) + "," + r.event + "\n";
  }
  return out;
}

inline std::vector<HistoryRow> parse_history(std::istream& in, const std::string& source = "<history>") {
  std::string line;
  std::size_t lineno = 1;
  bool got = false;
  while ((got = static_cast<bool>(std::getline(in, line))) && !line.empty() && line[0] == '#') ++lineno;
  if (!got || textio::trim(line) != kHistoryHeader)
    fail(ErrorKind::kParse, source + ":" + std::to_string(lineno) + ": expected header '" + std::string(kHistoryHeader) + "'");
  std::vector<HistoryRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (textio::trim(line).empty() || line[0] == '#') continue;
    const auto f = textio::split(textio::trim(line), ',');
    const std::string ctx = source + ":" + std::to_string(lineno);
    if (f.size() != 5) fail(ErrorKind::kParse, ctx + ": expected 5 columns");
    rows.push_back({static_cast<long>(textio::parse_u64(f[0], ctx)), textio::parse_double(f[1], ctx),
                    textio::parse_double(f[2], ctx), textio::parse_double(f[3], ctx), std::string(f[4])});
  }
  return rows;
}

}  // namespace neuromap
