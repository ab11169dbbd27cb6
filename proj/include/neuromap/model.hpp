#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromap/error.hpp"
#include "neuromap/pose.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/textio.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

/// kAngle: 3 outputs (nx, ny, theta/180). kSinCos: 4 outputs (nx, ny, sin, cos),
/// which avoids the +-180 seam at the cost of departing from a 3-output head.
enum class YawMode { kAngle, kSinCos };

inline const char* to_string(YawMode m) { return m == YawMode::kAngle ? "angle" : "sincos"; }
inline YawMode parse_yaw_mode(const std::string& s) {
  if (s == "angle") return YawMode::kAngle;
  if (s == "sincos") return YawMode::kSinCos;
  fail(ErrorKind::kInvalidArgument, "unknown yaw mode '" + s + "' (expected angle|sincos)");
}

inline std::size_t output_dim(YawMode m) { return m == YawMode::kAngle ? 3 : 4; }

enum class LossKind { kL1, kL2 };

inline LossKind parse_loss(const std::string& s) {
  if (s == "l1") return LossKind::kL1;
  if (s == "l2") return LossKind::kL2;
  fail(ErrorKind::kInvalidArgument, "unknown loss '" + s + "' (expected l1|l2)");
}

/// Fully connected regressor: relu hidden layers, tanh output head.
/// All parameters live in one flat vector; layer l stores its weight matrix
/// (dims[l+1] x dims[l], row-major) followed by its bias.
class RegressorModel {
 public:
  RegressorModel() = default;
  RegressorModel(std::vector<int> layer_dims, YawMode yaw_mode = YawMode::kAngle)
      : dims_(std::move(layer_dims)), yaw_mode_(yaw_mode) {
    if (dims_.size() < 2) fail(ErrorKind::kInvalidArgument, "RegressorModel: need at least input and output dims");
    for (int d : dims_)
      if (d < 1) fail(ErrorKind::kInvalidArgument, "RegressorModel: layer dims must be positive");
    if (static_cast<std::size_t>(dims_.back()) != output_dim(yaw_mode_))
      fail(ErrorKind::kInvalidArgument, "RegressorModel: output dim must be " + std::to_string(output_dim(yaw_mode_)));
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      w_off_.push_back(off);
      off += static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
      b_off_.push_back(off);
      off += static_cast<std::size_t>(dims_[l + 1]);
    }
    params_.assign(off, 0.0);
  }

  /// He-uniform for relu layers, Glorot-uniform for the tanh head, zero biases.
  void init_random(Rng& rng) {
    for (std::size_t l = 0; l < layers(); ++l) {
      const double fan_in = in_dim(l), fan_out = out_dim(l);
      const double limit = l + 1 < layers() ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
      auto w = weights(l);
      for (double& v : w) v = rng.uniform(-limit, limit);
      auto b = biases(l);
      std::fill(b.begin(), b.end(), 0.0);
    }
  }

  std::size_t layers() const { return dims_.empty() ? 0 : dims_.size() - 1; }
  int in_dim(std::size_t l) const { return dims_[l]; }
  int out_dim(std::size_t l) const { return dims_[l + 1]; }
  int input_dim() const { return dims_.front(); }
  const std::vector<int>& layer_dims() const { return dims_; }
  YawMode yaw_mode() const { return yaw_mode_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  std::span<double> weights(std::size_t l) { return {params_.data() + w_off_[l], static_cast<std::size_t>(dims_[l]) * dims_[l + 1]}; }
  std::span<const double> weights(std::size_t l) const { return {params_.data() + w_off_[l], static_cast<std::size_t>(dims_[l]) * dims_[l + 1]}; }
  std::span<double> biases(std::size_t l) { return {params_.data() + b_off_[l], static_cast<std::size_t>(dims_[l + 1])}; }
  std::span<const double> biases(std::size_t l) const { return {params_.data() + b_off_[l], static_cast<std::size_t>(dims_[l + 1])}; }
  std::size_t weight_offset(std::size_t l) const { return w_off_[l]; }
  std::size_t bias_offset(std::size_t l) const { return b_off_[l]; }

  bool all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const RegressorModel&, const RegressorModel&) = default;

 private:
  std::vector<int> dims_;
  YawMode yaw_mode_ = YawMode::kAngle;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;
};

/// Per-layer activations kept for backprop: acts[0] is the input,
/// acts[l+1] the post-activation output of layer l.
struct ForwardCache {
  std::vector<std::vector<double>> acts;
};

inline void forward_into(const RegressorModel& m, std::span<const double> input, ForwardCache& cache) {
  if (static_cast<int>(input.size()) != m.input_dim())
    fail(ErrorKind::kConfiguration, "forward: input has " + std::to_string(input.size()) + " values, model expects " +
                                        std::to_string(m.input_dim()));
  cache.acts.resize(m.layers() + 1);
  cache.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < m.layers(); ++l) {
    const int n_in = m.in_dim(l), n_out = m.out_dim(l);
    const auto w = m.weights(l);
    const auto b = m.biases(l);
    const auto& x = cache.acts[l];
    auto& y = cache.acts[l + 1];
    y.resize(static_cast<std::size_t>(n_out));
    const bool last = l + 1 == m.layers();
    for (int r = 0; r < n_out; ++r) {
      const double* row = w.data() + static_cast<std::size_t>(r) * n_in;
      double z = b[static_cast<std::size_t>(r)];
      for (int c = 0; c < n_in; ++c) z += row[c] * x[static_cast<std::size_t>(c)];
      y[static_cast<std::size_t>(r)] = last ? std::tanh(z) : (z > 0.0 ? z : 0.0);
    }
  }
}

/// Raw head outputs (3 or 4 values, each in (-1, 1)).
inline std::vector<double> forward_raw(const RegressorModel& m, std::span<const double> input) {
  ForwardCache cache;
  forward_into(m, input, cache);
  return cache.acts.back();
}

/// Maps head outputs to a normalised pose.
inline NormalizedPose head_to_pose(std::span<const double> out, YawMode mode) {
  if (mode == YawMode::kAngle) return {out[0], out[1], out[2]};
  const double s = out[2], c = out[3];
  const double ntheta = (s == 0.0 && c == 0.0) ? 0.0 : std::atan2(s, c) / std::numbers::pi;
  return {out[0], out[1], ntheta};
}

/// Training target for a normalised pose.
inline std::vector<double> pose_to_target(const NormalizedPose& p, YawMode mode) {
  if (mode == YawMode::kAngle) return {p.nx, p.ny, p.ntheta};
  const double rad = p.ntheta * std::numbers::pi;
  return {p.nx, p.ny, std::sin(rad), std::cos(rad)};
}

inline NormalizedPose forward(const RegressorModel& m, const Observation& obs) {
  const auto out = forward_raw(m, obs.ranges);
  return head_to_pose(out, m.yaw_mode());
}

/// Mean absolute difference over the three components. No wrap on ntheta.
inline double l1_loss(const NormalizedPose& pred, const NormalizedPose& truth) {
  return (std::abs(pred.nx - truth.nx) + std::abs(pred.ny - truth.ny) + std::abs(pred.ntheta - truth.ntheta)) / 3.0;
}

inline double vector_loss(std::span<const double> pred, std::span<const double> target, LossKind kind) {
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - target[k];
    acc += kind == LossKind::kL1 ? std::abs(d) : d * d;
  }
  return acc / static_cast<double>(pred.size());
}

struct BatchItem {
  std::span<const double> input;
  std::span<const double> target;
};

/// Batch-mean loss (no gradient).
inline double batch_loss(const RegressorModel& m, std::span<const BatchItem> batch, LossKind kind = LossKind::kL1) {
  if (batch.empty()) fail(ErrorKind::kInvalidArgument, "batch_loss: empty batch");
  ForwardCache cache;
  double total = 0.0;
  for (const auto& item : batch) {
    forward_into(m, item.input, cache);
    total += vector_loss(cache.acts.back(), item.target, kind);
  }
  return total / static_cast<double>(batch.size());
}

/// Reverse-mode gradient of the batch-mean loss with respect to every
/// parameter. Subgradient 0 is used at |0| and at relu(0). Returns the loss.
inline double backward(const RegressorModel& m, std::span<const BatchItem> batch, std::span<double> grad,
                       LossKind kind = LossKind::kL1) {
  if (batch.empty()) fail(ErrorKind::kInvalidArgument, "backward: empty batch");
  if (grad.size() != m.param_count()) fail(ErrorKind::kConfiguration, "backward: gradient buffer size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  std::vector<double> delta, prev_delta;
  double total = 0.0;

  for (const auto& item : batch) {
    forward_into(m, item.input, cache);
    const auto& out = cache.acts.back();
    const std::size_t n_out = out.size();
    if (item.target.size() != n_out) fail(ErrorKind::kConfiguration, "backward: target size mismatch");
    total += vector_loss(out, item.target, kind);

    // dLoss/dz at the tanh head.
    delta.assign(n_out, 0.0);
    for (std::size_t k = 0; k < n_out; ++k) {
      const double d = out[k] - item.target[k];
      const double dl = kind == LossKind::kL1 ? (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) : 2.0 * d;
      delta[k] = dl / static_cast<double>(n_out) * inv_b * (1.0 - out[k] * out[k]);
    }

    for (std::size_t l = m.layers(); l-- > 0;) {
      const int n_in = m.in_dim(l), n_o = m.out_dim(l);
      const auto& x = cache.acts[l];
      const auto w = m.weights(l);
      double* gw = grad.data() + m.weight_offset(l);
      double* gb = grad.data() + m.bias_offset(l);
      for (int r = 0; r < n_o; ++r) {
        const double dr = delta[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        gb[r] += dr;
        double* grow = gw + static_cast<std::size_t>(r) * n_in;
        for (int c = 0; c < n_in; ++c) grow[c] += dr * x[static_cast<std::size_t>(c)];
      }
      if (l == 0) break;
      prev_delta.assign(static_cast<std::size_t>(n_in), 0.0);
      for (int r = 0; r < n_o; ++r) {
        const double dr = delta[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        const double* row = w.data() + static_cast<std::size_t>(r) * n_in;
        for (int c = 0; c < n_in; ++c) prev_delta[static_cast<std::size_t>(c)] += dr * row[c];
      }
      // relu derivative on the hidden activation that fed this layer.
      for (int c = 0; c < n_in; ++c)
        if (!(x[static_cast<std::size_t>(c)] > 0.0)) prev_delta[static_cast<std::size_t>(c)] = 0.0;
      delta.swap(prev_delta);
    }
  }
  return total * inv_b;
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr const char* kModelMagic = "#neuromap-model v1";
inline constexpr int kModelDigits = 12;

/// Model plus the metadata needed to use it against an environment.
struct ModelFile {
  RegressorModel model;
  std::string env_name;
  SensorConfig sensor;
  EnvBounds bounds;
  std::string provenance;
};

inline void write_model(std::ostream& out, const ModelFile& f) {
  nlohmann::ordered_json header;
  header["layer_dims"] = f.model.layer_dims();
  header["activation"] = "relu";
  header["env_name"] = f.env_name;
  header["sensor"] = {{"fov", f.sensor.fov}, {"ray_count", f.sensor.ray_count}, {"max_range", f.sensor.max_range}};
  header["yaw_mode"] = to_string(f.model.yaw_mode());
  header["bounds"] = {f.bounds.x_min, f.bounds.x_max, f.bounds.y_min, f.bounds.y_max};
  if (!f.provenance.empty()) header["provenance"] = f.provenance;
  out << kModelMagic << '\n' << header.dump() << '\n';
  std::string line;
  auto emit = [&](const std::string& tag, std::span<const double> values) {
    line = tag;
    for (double v : values) {
      line += ' ';
      line += textio::format_sig(v, kModelDigits);
    }
    line += '\n';
    out << line;
  };
  for (std::size_t l = 0; l < f.model.layers(); ++l) {
    emit("W" + std::to_string(l), f.model.weights(l));
    emit("b" + std::to_string(l), f.model.biases(l));
  }
}

inline ModelFile read_model(std::istream& in, const std::string& source = "<model>") {
  auto where = [&](std::size_t n) { return source + ":" + std::to_string(n); };
  std::string line;
  if (!std::getline(in, line) || textio::trim(line) != kModelMagic)
    fail(ErrorKind::kParse, where(1) + ": not a neuromap model (expected '" + std::string(kModelMagic) + "')");
  if (!std::getline(in, line)) fail(ErrorKind::kParse, where(2) + ": missing JSON header");
  ModelFile f;
  std::vector<int> dims;
  YawMode mode = YawMode::kAngle;
  try {
    const auto h = nlohmann::json::parse(line);
    dims = h.at("layer_dims").get<std::vector<int>>();
    if (h.at("activation").get<std::string>() != "relu") fail(ErrorKind::kParse, where(2) + ": unsupported activation");
    f.env_name = h.at("env_name").get<std::string>();
    f.sensor.fov = h.at("sensor").at("fov").get<double>();
    f.sensor.ray_count = h.at("sensor").at("ray_count").get<int>();
    f.sensor.max_range = h.at("sensor").at("max_range").get<double>();
    mode = parse_yaw_mode(h.at("yaw_mode").get<std::string>());
    if (h.contains("bounds")) {
      const auto b = h.at("bounds").get<std::vector<double>>();
      if (b.size() != 4) fail(ErrorKind::kParse, where(2) + ": bounds must have 4 values");
      f.bounds = EnvBounds(b[0], b[1], b[2], b[3]);
    }
    if (h.contains("provenance")) f.provenance = h.at("provenance").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, where(2) + ": bad model header: " + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::kParse, where(2) + ": " + e.what());
  }
  f.model = RegressorModel(dims, mode);

  std::size_t lineno = 2;
  auto read_tensor = [&](const std::string& tag, std::span<double> dst) {
    do {
      if (!std::getline(in, line)) fail(ErrorKind::kParse, source + ": missing tensor " + tag);
      ++lineno;
    } while (textio::trim(line).empty());
    const auto fields = textio::split(textio::trim(line), ' ');
    if (fields[0] != tag) fail(ErrorKind::kParse, where(lineno) + ": expected tensor " + tag);
    if (fields.size() != dst.size() + 1)
      fail(ErrorKind::kParse, where(lineno) + ": tensor " + tag + " has " + std::to_string(fields.size() - 1) +
                                  " values, expected " + std::to_string(dst.size()));
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = textio::parse_double(fields[k + 1], where(lineno));
  };
  for (std::size_t l = 0; l < f.model.layers(); ++l) {
    read_tensor("W" + std::to_string(l), f.model.weights(l));
    read_tensor("b" + std::to_string(l), f.model.biases(l));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!textio::trim(line).empty()) fail(ErrorKind::kParse, where(lineno) + ": unexpected content after last tensor");
  }
  return f;
}

inline void save_model(const ModelFile& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write model '" + path.string() + "'");
  write_model(out, f);
}

inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model '" + path.string() + "'");
  return read_model(in, path.string());
}

inline std::string model_to_string(const ModelFile& f) {
  std::ostringstream out;
  write_model(out, f);
  return out.str();
}

}  // namespace neuromap
