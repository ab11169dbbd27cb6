#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "neuromap/capture.hpp"
#include "oracles.hpp"

using namespace neuromap;

namespace {

EnvironmentSpec cabin() {
  static const EnvironmentSpec env = load_environment(std::filesystem::path(NEUROMAP_DATA_DIR) / "cabin.grid");
  return env;
}

// 8 m x 8 m at 0.5 m/cell with whole 1 m blocks occupied, so every 1 m
// coarse cell is either fully free or fully blocked.
EnvironmentSpec block_world() {
  OccupancyGrid g(16, 16, 0.5);
  const int blocks[][2] = {{1, 1}, {2, 5}, {6, 6}, {6, 2}, {3, 3}, {0, 7}};
  for (auto [bx, by] : blocks)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) g.set_occupied(2 * bx + di, 2 * by + dj);
  return make_environment("blocks", g, SensorConfig{120.0, 8, 10.0});
}

double chi2_critical_99(int df) {
  // Wilson-Hilferty approximation with z = 2.3263.
  const double z = 2.3263478740408408;
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

Dataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in, "mem");
}

std::string load_error(const std::string& text) {
  try {
    parse_dataset(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    return e.what();
  }
  ADD_FAILURE() << "expected a parse error";
  return {};
}

}  // namespace

TEST(SampleRandomPose, FreeGridAcceptsFirstDraw) {
  const auto env = make_environment("open", OccupancyGrid(10, 10, 0.5));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    long attempts = 0;
    const Pose2D p = sample_random_pose(env, rng, &attempts);
    EXPECT_EQ(attempts, 1);
    EXPECT_GT(p.theta(), -180.0);
    EXPECT_LE(p.theta(), 180.0);
  }
}

TEST(SampleRandomPose, SingleFreeCellForcesOutcome) {
  OccupancyGrid g(5, 5, 1.0);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) g.set_occupied(i, j, !(i == 3 && j == 1));
  const auto env = make_environment("one", g);
  Rng rng(2);
  for (int n = 0; n < 50; ++n) {
    const Pose2D p = sample_random_pose(env, rng);
    EXPECT_GE(p.x(), 3.0);
    EXPECT_LT(p.x(), 4.0);
    EXPECT_GE(p.y(), 1.0);
    EXPECT_LT(p.y(), 2.0);
  }
}

TEST(SampleRandomPose, FullyBlockedIsInfeasible) {
  OccupancyGrid g(3, 3, 1.0);
  g.fill_rect(0, 0, 3, 3);
  const auto env = make_environment("solid", g);
  Rng rng(3);
  try {
    sample_random_pose(env, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(SampleRandomPose, AcceptanceRateMatchesFreeFraction) {
  OccupancyGrid g(20, 20, 0.25);
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i)
      if (i < 10 || (i + j) % 7 == 0) g.set_occupied(i, j);
  const auto env = make_environment("half", g);
  std::size_t free_cells = 0;
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i) free_cells += !g.occupied(i, j);
  const double free_fraction = static_cast<double>(free_cells) / 400.0;
  Rng rng(4);
  long total = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    long attempts = 0;
    sample_random_pose(env, rng, &attempts);
    total += attempts;
  }
  EXPECT_NEAR(static_cast<double>(n) / static_cast<double>(total), free_fraction, 0.01);
}

TEST(GenerateDataset, DeterministicAndDense) {
  const auto env = cabin();
  const auto a = generate_dataset(env, 1, 42), b = generate_dataset(env, 1, 42);
  EXPECT_EQ(dataset_to_string(a), dataset_to_string(b));
  const auto d = generate_dataset(env, 500, 7);
  ASSERT_EQ(d.size(), 500u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.samples[i].id, i);
    EXPECT_TRUE(is_free(env.grid, d.samples[i].pose.x(), d.samples[i].pose.y()));
    EXPECT_EQ(d.samples[i].observation.size(), 96u);
  }
  EXPECT_EQ(d.env_name, "cabin");
  EXPECT_EQ(d.seed, 7u);
  EXPECT_THROW(generate_dataset(env, 0, 1), Error);
}

TEST(GenerateDataset, ShardingByIndexIsStable) {
  const auto env = cabin();
  const auto small = generate_dataset(env, 20, 9), large = generate_dataset(env, 60, 9);
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_EQ(small.samples[i].pose, large.samples[i].pose);
    EXPECT_EQ(small.samples[i].observation, large.samples[i].observation);
  }
}

TEST(GenerateDataset, DifferentSeedsGiveDifferentPoses) {
  const auto env = cabin();
  const auto train = generate_dataset(env, 500, 1), test = generate_dataset(env, 500, 2);
  std::set<std::pair<double, double>> seen;
  for (const auto& s : train.samples) seen.insert({s.pose.x(), s.pose.y()});
  for (const auto& s : test.samples) EXPECT_EQ(seen.count({s.pose.x(), s.pose.y()}), 0u);
}

TEST(GenerateDataset, CoversEveryFreeCoarseCell) {
  const auto env = cabin();
  const auto d = generate_dataset(env, 10000, 5);
  const auto& g = env.grid;
  const int nx = 7, ny = 15;
  std::vector<int> free_area(nx * ny, 0), hits(nx * ny, 0);
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i)
      if (!g.occupied(i, j)) {
        const int cx = static_cast<int>((i + 0.5) * g.resolution()), cy = static_cast<int>((j + 0.5) * g.resolution());
        ++free_area[cy * nx + cx];
      }
  for (const auto& s : d.samples) ++hits[static_cast<int>(s.pose.y()) * nx + static_cast<int>(s.pose.x())];
  // 20x20 fine cells per coarse cell; require a sample wherever at least 5% is free.
  for (int k = 0; k < nx * ny; ++k) {
    if (free_area[k] >= 20) {
      EXPECT_GT(hits[k], 0) << "coarse cell " << k;
    }
  }
}

TEST(GenerateDataset, ChiSquaredUniformOverFreeSpace) {
  const auto env = block_world();
  Rng rng(6);
  const int n = 100000;
  std::vector<int> counts(64, 0);
  std::vector<bool> free_cell(64, true);
  for (int cy = 0; cy < 8; ++cy)
    for (int cx = 0; cx < 8; ++cx) free_cell[cy * 8 + cx] = !env.grid.occupied(2 * cx, 2 * cy);
  for (int k = 0; k < n; ++k) {
    const Pose2D p = sample_random_pose(env, rng);
    const int c = static_cast<int>(p.y()) * 8 + static_cast<int>(p.x());
    ASSERT_TRUE(free_cell[c]);
    ++counts[c];
  }
  int k_free = 0;
  for (bool f : free_cell) k_free += f;
  const double expected = static_cast<double>(n) / k_free;
  double chi2 = 0.0;
  for (int c = 0; c < 64; ++c)
    if (free_cell[c]) chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
  EXPECT_LT(chi2, chi2_critical_99(k_free - 1));
}

TEST(CaptureTrigger, ThresholdsAreStrictAndCumulative) {
  CaptureTrigger t(0.10, 10.0);
  EXPECT_FALSE(t.update(0.05, 0.0));
  EXPECT_FALSE(t.update(0.0, 5.0));
  CaptureTrigger u(0.10, 10.0);
  EXPECT_TRUE(u.update(0.12, 0.0));
  EXPECT_DOUBLE_EQ(u.path(), 0.0);
  CaptureTrigger v(0.10, 10.0);
  EXPECT_FALSE(v.update(0.10, 10.0));  // equal is not more
  EXPECT_TRUE(v.update(0.0, 0.5));     // rotation now 10.5
  CaptureTrigger w(0.10, 10.0);
  EXPECT_FALSE(w.update(0.0, -6.0));
  EXPECT_TRUE(w.update(0.0, 6.0));     // absolute rotation accumulates
}

TEST(CaptureTrigger, StraightCorridorSpacing) {
  CaptureTrigger t(0.10, 10.0);
  int captures = 0;
  for (int step = 0; step < 10; ++step) captures += t.update(0.1, 0.0);
  // 0.1 m steps never exceed 0.1 m alone, so every second step captures.
  EXPECT_EQ(captures, 5);
  CaptureTrigger fine(0.10, 10.0);
  captures = 0;
  for (int step = 0; step < 10; ++step) captures += fine.update(0.1001, 0.0);
  EXPECT_EQ(captures, 10);
}

TEST(RandomWalk, ZeroStepsCapturesStartOnly) {
  WalkConfig cfg;
  cfg.max_steps = 0;
  const auto w = random_walk_capture(cabin(), cfg, 3);
  ASSERT_EQ(w.dataset.size(), 1u);
  EXPECT_TRUE(w.log.empty());
  EXPECT_FALSE(w.wedged);
  EXPECT_TRUE(footprint_free(cabin().grid, w.dataset.samples[0].pose, cfg.clearance_radius));
}

TEST(RandomWalk, ConsecutiveCapturesSatisfyRule) {
  WalkConfig cfg;
  cfg.max_steps = 3000;
  const auto env = cabin();
  const auto w = random_walk_capture(env, cfg, 11);
  EXPECT_FALSE(w.wedged);
  ASSERT_EQ(w.log.size(), 3000u);
  double path = 0.0, rot = 0.0;
  std::size_t capture = 1;
  for (const auto& s : w.log) {
    path += std::abs(s.advanced);
    rot += std::abs(s.rotated);
    ASSERT_TRUE(footprint_free(env.grid, s.pose, cfg.clearance_radius));
    const bool rule = path > cfg.capture_dist || rot > cfg.capture_rot;
    ASSERT_EQ(rule, s.captured) << "step " << s.step;
    if (s.captured) {
      ASSERT_LT(capture, w.dataset.size());
      EXPECT_EQ(w.dataset.samples[capture].pose, s.pose);
      EXPECT_EQ(w.dataset.samples[capture].id, capture);
      ++capture;
      path = rot = 0.0;
    }
  }
  EXPECT_EQ(capture, w.dataset.size());
}

TEST(RandomWalk, Deterministic) {
  WalkConfig cfg;
  cfg.max_steps = 500;
  EXPECT_EQ(dataset_to_string(random_walk_capture(cabin(), cfg, 5).dataset),
            dataset_to_string(random_walk_capture(cabin(), cfg, 5).dataset));
}

TEST(RandomWalk, KeepsClearOfObstaclesUnlikeUniformSampling) {
  const auto env = cabin();
  WalkConfig cfg;
  cfg.max_steps = 2000;
  const auto walk = random_walk_capture(env, cfg, 8).dataset;
  const auto gen = generate_dataset(env, static_cast<std::size_t>(walk.size()), 8);
  auto near_fraction = [&](const Dataset& d) {
    std::size_t near = 0;
    for (const auto& s : d.samples) near += !oracle::footprint_clear(env.grid, s.pose.x(), s.pose.y(), 0.3);
    return static_cast<double>(near) / static_cast<double>(d.size());
  };
  EXPECT_EQ(near_fraction(walk), 0.0);
  EXPECT_GT(near_fraction(gen), 0.1);
}

TEST(RandomWalk, NoRoomForFootprintIsInfeasible) {
  const auto env = make_environment("tiny", OccupancyGrid(8, 8, 0.1));
  try {
    random_walk_capture(env, WalkConfig{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(RandomWalk, WedgedRobotStopsEarly) {
  // 1.02 m square: the 0.5 m disc fits but can never advance 0.1 m.
  const auto env = make_environment("box", OccupancyGrid(51, 51, 0.02));
  WalkConfig cfg;
  const auto w = random_walk_capture(env, cfg, 1);
  EXPECT_TRUE(w.wedged);
  EXPECT_EQ(w.log.size(), static_cast<std::size_t>(cfg.wedge_limit));
  EXPECT_GE(w.dataset.size(), 1u);
}

TEST(Split, ZeroTestSamples) {
  const auto d = generate_dataset(cabin(), 30, 1);
  const auto [train, test] = split(d, 0, 5);
  EXPECT_EQ(dataset_to_string(train), dataset_to_string(d));
  EXPECT_TRUE(test.empty());
}

TEST(Split, DisjointRenumberedAndSeeded) {
  const auto d = generate_dataset(cabin(), 100, 1);
  const auto [a_train, a_test] = split(d, 25, 5);
  const auto [b_train, b_test] = split(d, 25, 5);
  EXPECT_EQ(dataset_to_string(a_test), dataset_to_string(b_test));
  ASSERT_EQ(a_train.size(), 75u);
  ASSERT_EQ(a_test.size(), 25u);
  std::set<std::pair<double, double>> train_poses;
  for (std::size_t i = 0; i < a_train.size(); ++i) {
    EXPECT_EQ(a_train.samples[i].id, i);
    train_poses.insert({a_train.samples[i].pose.x(), a_train.samples[i].pose.y()});
  }
  for (const auto& s : a_test.samples) EXPECT_EQ(train_poses.count({s.pose.x(), s.pose.y()}), 0u);
  const auto [c_train, c_test] = split(d, 25, 6);
  EXPECT_NE(dataset_to_string(c_test), dataset_to_string(a_test));
  EXPECT_THROW(split(d, 100, 1), Error);
}

TEST(DatasetFile, EmptyDatasetIsHeaderOnly) {
  Dataset d{"void", SensorConfig{}, 3, {}, {}};
  const std::string text = dataset_to_string(d);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.rfind(kDatasetMagic, 0), 0u);
  const auto back = parse_dataset(text);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(dataset_to_string(back), text);
}

TEST(DatasetFile, RoundTripWithinTolerance) {
  const auto d = generate_dataset(cabin(), 1000, 13);
  const std::string first = dataset_to_string(d);
  const auto back = parse_dataset(first);
  ASSERT_EQ(back.size(), d.size());
  EXPECT_EQ(back.sensor, d.sensor);
  EXPECT_EQ(back.seed, d.seed);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(back.samples[i].pose.x(), d.samples[i].pose.x(), 1e-7);
    EXPECT_NEAR(back.samples[i].pose.y(), d.samples[i].pose.y(), 1e-7);
    EXPECT_NEAR(ang_diff(back.samples[i].pose.theta(), d.samples[i].pose.theta()), 0.0, 1e-6);
    for (std::size_t k = 0; k < 96; ++k)
      EXPECT_NEAR(back.samples[i].observation.ranges[k], d.samples[i].observation.ranges[k], 1e-9);
  }
  EXPECT_EQ(dataset_to_string(back), first);
}

TEST(DatasetFile, ThetaNearSeamStaysCanonical) {
  Dataset d{"seam", SensorConfig{360.0, 1, 5.0}, 0, {}, {}};
  d.samples.push_back({0, Observation{{0.5}}, Pose2D(1, 1, -179.9999999999)});
  const std::string text = dataset_to_string(d);
  EXPECT_NE(text.find("\n0,1,1,180,0.5\n"), std::string::npos) << text;
  EXPECT_EQ(dataset_to_string(parse_dataset(text)), text);
}

TEST(DatasetFile, ProvenanceIsKept) {
  auto d = generate_dataset(cabin(), 3, 1);
  d.provenance = "neuromap test";
  EXPECT_EQ(parse_dataset(dataset_to_string(d)).provenance, "neuromap test");
}

TEST(DatasetFile, ValidationErrors) {
  const std::string header = std::string(kDatasetMagic) +
                             "\n{\"env_name\":\"e\",\"seed\":1,\"fov\":360,\"ray_count\":2,\"max_range\":5,\"n\":1}\n";
  EXPECT_NE(load_error(header + "0,1,1,0,0.5\n").find("mem:3"), std::string::npos);
  EXPECT_NE(load_error(header + "0,1,1,0,0.5,0.5,0.5\n").find("columns"), std::string::npos);
  EXPECT_NE(load_error(header + "1,1,1,0,0.5,0.5\n").find("dense"), std::string::npos);
  EXPECT_NE(load_error(header + "0,1,1,0,0.5,1.5\n").find("outside"), std::string::npos);
  EXPECT_NE(load_error(header + "0,1,x,0,0.5,0.5\n").find("bad number"), std::string::npos);
  EXPECT_NE(load_error(header).find("declares 1"), std::string::npos);
  EXPECT_NE(load_error("#something else\n{}\n").find("not a neuromap dataset"), std::string::npos);
  EXPECT_NE(load_error(std::string(kDatasetMagic) + "\n{\"env_name\":1}\n").find("mem:2"), std::string::npos);
  EXPECT_NE(load_error(std::string(kDatasetMagic) +
                       "\n{\"env_name\":\"e\",\"seed\":1,\"fov\":90,\"ray_count\":1,\"max_range\":5,\"n\":0}\n")
                .find("ray_count"),
            std::string::npos);
}

TEST(DatasetFile, LoadMissingFile) {
  try {
    load_dataset("/nonexistent/d.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
