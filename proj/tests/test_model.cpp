#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "neuromap/model.hpp"
#include "oracles.hpp"

using namespace neuromap;

namespace {

std::vector<BatchItem> as_batch(const std::vector<oracle::Item>& items) {
  std::vector<BatchItem> out;
  for (const auto& it : items) out.push_back({it.input, it.target});
  return out;
}

std::vector<oracle::Item> random_items(Rng& rng, int in, int out, int n) {
  std::vector<oracle::Item> items(static_cast<std::size_t>(n));
  for (auto& it : items) {
    for (int k = 0; k < in; ++k) it.input.push_back(rng.uniform());
    for (int k = 0; k < out; ++k) it.target.push_back(rng.uniform(-1.0, 1.0));
  }
  return items;
}

ModelFile parse_model(const std::string& text) {
  std::istringstream in(text);
  return read_model(in, "mem");
}

}  // namespace

TEST(Model, ZeroWeightsGiveZeroOutput) {
  RegressorModel m({6, 8, 3});
  const Observation obs{std::vector<double>(6, 0.7)};
  const auto p = forward(m, obs);
  EXPECT_EQ(p.nx, 0.0);
  EXPECT_EQ(p.ny, 0.0);
  EXPECT_EQ(p.ntheta, 0.0);
}

TEST(Model, SingleLayerIsTanhOfSum) {
  RegressorModel m({4, 3});
  for (double& w : m.weights(0)) w = 1.0;
  const Observation obs{{0.1, 0.2, 0.3, 0.4}};
  const auto out = forward_raw(m, obs.ranges);
  for (double v : out) EXPECT_NEAR(v, std::tanh(1.0), 1e-15);
}

TEST(Model, OutputsBounded) {
  Rng rng(1);
  RegressorModel m({10, 32, 3});
  m.init_random(rng);
  for (double& w : m.weights(1)) w *= 100.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(10);
    for (double& v : x) v = rng.uniform();
    for (double v : forward_raw(m, x)) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Model, L1LossExample) {
  EXPECT_NEAR(l1_loss({0.5, 0.5, 0.0}, {-0.5, 0.5, 1.0}), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(l1_loss({0.0, 0.0, 0.0}, {0.5, 1.0, 1.0}), 0.8333333333333334, 1e-12);
  EXPECT_EQ(l1_loss({0.2, -0.3, 0.9}, {0.2, -0.3, 0.9}), 0.0);
}

TEST(Model, ForwardMatchesNaiveOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    RegressorModel m({7, 5, 6, 3});
    m.init_random(rng);
    for (double& b : m.params()) b += rng.uniform(-0.1, 0.1);
    const auto items = random_items(rng, 7, 3, 4);
    const auto batch = as_batch(items);
    EXPECT_NEAR(batch_loss(m, batch, LossKind::kL1), oracle::naive_loss(m, items, true), 1e-14);
    EXPECT_NEAR(batch_loss(m, batch, LossKind::kL2), oracle::naive_loss(m, items, false), 1e-14);
  }
}

TEST(Model, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  std::size_t compared = 0, skipped = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 2 + static_cast<int>(rng.below(6));
    const int hidden = 2 + static_cast<int>(rng.below(8));
    const YawMode mode = trial % 2 ? YawMode::kSinCos : YawMode::kAngle;
    const int out = static_cast<int>(output_dim(mode));
    std::vector<int> dims{in, hidden};
    if (trial % 3 == 0) dims.push_back(2 + static_cast<int>(rng.below(5)));
    dims.push_back(out);
    RegressorModel m(dims, mode);
    m.init_random(rng);
    for (double& p : m.params()) p += rng.uniform(-0.2, 0.2);
    const auto items = random_items(rng, in, out, 1 + static_cast<int>(rng.below(4)));
    const auto batch = as_batch(items);
    for (bool l1 : {true, false}) {
      std::vector<double> grad(m.param_count());
      const double loss = backward(m, batch, grad, l1 ? LossKind::kL1 : LossKind::kL2);
      EXPECT_NEAR(loss, oracle::naive_loss(m, items, l1), 1e-14);
      const auto r = oracle::check_gradient(m, items, grad, l1);
      EXPECT_LT(r.max_rel_err, 1e-4) << "trial " << trial << " l1=" << l1;
      compared += r.compared;
      skipped += r.skipped;
    }
  }
  EXPECT_GT(compared, 50 * skipped);
}

TEST(Model, ZeroResidualGivesZeroL1Gradient) {
  Rng rng(4);
  RegressorModel m({5, 6, 3});
  m.init_random(rng);
  std::vector<double> x(5);
  for (double& v : x) v = rng.uniform();
  const auto y = forward_raw(m, x);
  const std::vector<BatchItem> batch{{x, y}};
  std::vector<double> grad(m.param_count(), 1.0);
  EXPECT_EQ(backward(m, batch, grad, LossKind::kL1), 0.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Model, DimensionMismatchIsConfigurationError) {
  RegressorModel m({5, 3});
  const Observation obs{std::vector<double>(4, 0.1)};
  try {
    forward(m, obs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfiguration);
  }
  std::vector<double> grad(2);
  const std::vector<double> x(5, 0.1), t(3, 0.0);
  const std::vector<BatchItem> batch{{x, t}};
  EXPECT_THROW(backward(m, batch, grad), Error);
  EXPECT_THROW(RegressorModel({5, 4}), Error);
  EXPECT_THROW(RegressorModel({5, 3}, YawMode::kSinCos), Error);
}

TEST(Model, SinCosHead) {
  const double r = 0.3;
  const auto p = head_to_pose(std::vector<double>{0.1, 0.2, std::sin(r * std::numbers::pi), std::cos(r * std::numbers::pi)},
                              YawMode::kSinCos);
  EXPECT_NEAR(p.ntheta, r, 1e-15);
  const auto t = pose_to_target({0.1, 0.2, -0.75}, YawMode::kSinCos);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_NEAR(std::atan2(t[2], t[3]) / std::numbers::pi, -0.75, 1e-15);
  EXPECT_EQ(parse_yaw_mode("sincos"), YawMode::kSinCos);
  EXPECT_THROW(parse_yaw_mode("quaternion"), Error);
  EXPECT_EQ(parse_loss("l2"), LossKind::kL2);
}

TEST(ModelFile, RoundTrip) {
  Rng rng(5);
  ModelFile f{RegressorModel({12, 9, 4}, YawMode::kSinCos), "cabin", SensorConfig{90.0, 12, 8.0}, EnvBounds(0, 7, 0, 15),
              "test"};
  f.model.init_random(rng);
  const std::string text = model_to_string(f);
  const auto g = parse_model(text);
  EXPECT_EQ(g.model.layer_dims(), f.model.layer_dims());
  EXPECT_EQ(g.model.yaw_mode(), YawMode::kSinCos);
  EXPECT_EQ(g.sensor, f.sensor);
  EXPECT_EQ(g.bounds, f.bounds);
  EXPECT_EQ(g.env_name, "cabin");
  EXPECT_EQ(g.provenance, "test");
  for (std::size_t i = 0; i < f.model.param_count(); ++i)
    EXPECT_NEAR(g.model.params()[i], f.model.params()[i], 1e-11 * std::max(1.0, std::abs(f.model.params()[i])));
  EXPECT_EQ(model_to_string(g), text);
}

TEST(ModelFile, ParseErrors) {
  ModelFile f{RegressorModel({2, 3}), "e", SensorConfig{360.0, 2, 5.0}, EnvBounds(0, 1, 0, 1), ""};
  const std::string good = model_to_string(f);
  EXPECT_NO_THROW(parse_model(good));
  auto expect_parse = [](const std::string& text, const std::string& needle) {
    try {
      parse_model(text);
      ADD_FAILURE() << "no error for: " << needle;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParse);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_parse("garbage\n", "not a neuromap model");
  const auto head_end = good.find('\n', good.find('\n') + 1) + 1;
  expect_parse(good.substr(0, head_end), "missing tensor W0");
  expect_parse(good.substr(0, head_end) + "W0 1 2 3\n", "expected 6");
  expect_parse(good.substr(0, head_end) + "b0 0 0 0\n", "expected tensor W0");
  expect_parse(good + "extra\n", "unexpected content");
  std::string bad_act = good;
  bad_act.replace(bad_act.find("relu"), 4, "gelu");
  expect_parse(bad_act, "unsupported activation");
}
