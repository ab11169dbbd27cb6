#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "neuromap/pose.hpp"
#include "neuromap/rng.hpp"
#include "neuromap/textio.hpp"

using namespace neuromap;

namespace {

// Reference wrap: shift by whole turns until the value lands in (-180, 180].
double wrap_by_turns(double a) {
  while (a > 180.0) a -= 360.0;
  while (a <= -180.0) a += 360.0;
  return a;
}

// Smallest signed a - b + 360k by exhaustive search over nearby k.
double min_turn_diff(double a, double b) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = -4; k <= 4; ++k) {
    const double d = a - b + 360.0 * k;
    if (d > -180.0 && d <= 180.0 && std::abs(d) < std::abs(best)) best = d;
  }
  return best;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::kRuntime;
}

const EnvBounds kCabin(0.0, 7.0, 0.0, 15.0);

}  // namespace

TEST(WrapAngle, Examples) {
  EXPECT_DOUBLE_EQ(wrap_angle(190.0), -170.0);
  EXPECT_DOUBLE_EQ(wrap_angle(360.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(-540.0), wrap_by_turns(-540.0));
  EXPECT_DOUBLE_EQ(wrap_angle(-540.0), 180.0);
  EXPECT_DOUBLE_EQ(wrap_angle(-180.0), 180.0);
  EXPECT_DOUBLE_EQ(wrap_angle(180.0), 180.0);
}

TEST(WrapAngle, RejectsNonFinite) {
  EXPECT_EQ(kind_of([] { wrap_angle(std::nan("")); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { wrap_angle(std::numeric_limits<double>::infinity()); }), ErrorKind::kInvalidArgument);
}

TEST(WrapAngle, IdempotentAndInRange) {
  Rng rng(11);
  for (int n = 0; n < 100000; ++n) {
    const double a = rng.uniform(-1e6, 1e6);
    const double w = wrap_angle(a);
    ASSERT_GT(w, -180.0);
    ASSERT_LE(w, 180.0);
    ASSERT_EQ(wrap_angle(w), w);
  }
}

TEST(WrapAngle, MatchesTurnShiftingOracle) {
  Rng rng(12);
  for (int n = 0; n < 10000; ++n) {
    const double a = rng.uniform(-3000.0, 3000.0);
    ASSERT_NEAR(wrap_angle(a), wrap_by_turns(a), 1e-9) << a;
  }
}

TEST(AngDiff, Examples) {
  EXPECT_DOUBLE_EQ(ang_diff(10.0, 350.0), 20.0);
  EXPECT_DOUBLE_EQ(ang_diff(42.5, 42.5), 0.0);
  EXPECT_NEAR(ang_diff(-170.0, 170.0), min_turn_diff(-170.0, 170.0), 1e-12);
  EXPECT_NEAR(ang_diff(-170.0, 170.0), 20.0, 1e-12);
}

TEST(AngDiff, AntisymmetricAwayFromHalfTurn) {
  Rng rng(13);
  int checked = 0;
  for (int n = 0; n < 20000; ++n) {
    const double a = rng.uniform(-720.0, 720.0), b = rng.uniform(-720.0, 720.0);
    const double d = ang_diff(a, b);
    ASSERT_NEAR(d, min_turn_diff(a, b), 1e-9);
    if (std::abs(d) < 180.0 - 1e-9) {
      ASSERT_NEAR(d, -ang_diff(b, a), 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 19000);
}

TEST(AngDiff, RejectsNonFinite) {
  EXPECT_EQ(kind_of([] { ang_diff(0.0, std::nan("")); }), ErrorKind::kInvalidArgument);
}

TEST(Pose2D, WrapsThetaAndRejectsNonFinite) {
  Pose2D p(1.0, 2.0, 270.0);
  EXPECT_DOUBLE_EQ(p.theta(), -90.0);
  p.rotate(-100.0);
  EXPECT_DOUBLE_EQ(p.theta(), 170.0);
  EXPECT_EQ(kind_of([] { Pose2D(std::nan(""), 0.0, 0.0); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { Pose2D(0.0, 0.0, std::numeric_limits<double>::infinity()); }), ErrorKind::kInvalidArgument);
}

TEST(Distance, Examples) {
  EXPECT_DOUBLE_EQ(distance(Pose2D(0, 0, 0), Pose2D(3, 4, 0)), 5.0);
  EXPECT_DOUBLE_EQ(distance(Pose2D(2, -1, 30), Pose2D(2, -1, 80)), 0.0);
  EXPECT_DOUBLE_EQ(distance(Pose2D(1, 1, 0), Pose2D(4, 5, 0)), 5.0);
}

TEST(Distance, TriangleInequality) {
  Rng rng(14);
  for (int n = 0; n < 10000; ++n) {
    const Pose2D a(rng.uniform(-50, 50), rng.uniform(-50, 50), 0), b(rng.uniform(-50, 50), rng.uniform(-50, 50), 0),
        c(rng.uniform(-50, 50), rng.uniform(-50, 50), 0);
    ASSERT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
    ASSERT_DOUBLE_EQ(distance(a, b), distance(b, a));
  }
}

TEST(Heading, Examples) {
  EXPECT_DOUBLE_EQ(heading(Pose2D(0, 0, 0), Pose2D(1, 0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(heading(Pose2D(0, 0, 0), Pose2D(0, 1, 0)), 90.0);
  EXPECT_NEAR(heading(Pose2D(0, 0, 0), Pose2D(-1, -1, 0)), -135.0, 1e-12);
  EXPECT_DOUBLE_EQ(heading(Pose2D(0, 0, 0), Pose2D(-1, 0, 0)), 180.0);
}

TEST(Heading, CoincidentPointsAreDegenerate) {
  EXPECT_EQ(kind_of([] { heading(Pose2D(1, 1, 0), Pose2D(1, 1, 45)); }), ErrorKind::kDegenerate);
}

TEST(Normalize, Examples) {
  const auto c = normalize(Pose2D(3.5, 7.5, 0), kCabin);
  EXPECT_DOUBLE_EQ(c.nx, 0.0);
  EXPECT_DOUBLE_EQ(c.ny, 0.0);
  EXPECT_DOUBLE_EQ(c.ntheta, 0.0);
  const auto hi = normalize(Pose2D(7, 15, 180), kCabin);
  EXPECT_DOUBLE_EQ(hi.nx, 1.0);
  EXPECT_DOUBLE_EQ(hi.ny, 1.0);
  EXPECT_DOUBLE_EQ(hi.ntheta, 1.0);
  const auto lo = normalize(Pose2D(0, 0, 90), kCabin);
  EXPECT_DOUBLE_EQ(lo.nx, 2.0 * (0.0 - 0.0) / 7.0 - 1.0);
  EXPECT_DOUBLE_EQ(lo.ny, -1.0);
  EXPECT_DOUBLE_EQ(lo.ntheta, 90.0 / 180.0);
}

TEST(Normalize, OutOfBounds) {
  EXPECT_EQ(kind_of([] { normalize(Pose2D(7.01, 1, 0), kCabin); }), ErrorKind::kOutOfBounds);
  EXPECT_EQ(kind_of([] { normalize(Pose2D(1, -0.01, 0), kCabin); }), ErrorKind::kOutOfBounds);
}

TEST(Denormalize, Examples) {
  const auto c = denormalize({0, 0, 0}, kCabin);
  EXPECT_DOUBLE_EQ(c.pose.x(), 3.5);
  EXPECT_DOUBLE_EQ(c.pose.y(), 7.5);
  EXPECT_DOUBLE_EQ(c.pose.theta(), 0.0);
  EXPECT_FALSE(c.clamped);
  const auto e = denormalize({1, -1, -0.5}, EnvBounds(0, 10, 0, 10));
  EXPECT_DOUBLE_EQ(e.pose.x(), 10.0);
  EXPECT_DOUBLE_EQ(e.pose.y(), 0.0);
  EXPECT_DOUBLE_EQ(e.pose.theta(), -90.0);
}

TEST(Denormalize, ClampsAndFlags) {
  const auto e = denormalize({2.0, 0.0, -3.0}, EnvBounds(0, 10, 0, 10));
  EXPECT_TRUE(e.clamped);
  EXPECT_DOUBLE_EQ(e.pose.x(), 10.0);
  EXPECT_DOUBLE_EQ(e.pose.theta(), 180.0);  // -1 -> -180 -> canonical +180
  EXPECT_EQ(kind_of([] { denormalize({std::nan(""), 0, 0}, EnvBounds(0, 1, 0, 1)); }), ErrorKind::kInvalidArgument);
}

TEST(Denormalize, RoundTrip) {
  Rng rng(15);
  const EnvBounds b(-3.0, 11.5, 2.0, 9.0);
  for (int n = 0; n < 10000; ++n) {
    const Pose2D p(rng.uniform(b.x_min, b.x_max), rng.uniform(b.y_min, b.y_max), rng.uniform(-180, 180));
    const auto q = denormalize(normalize(p, b), b);
    ASSERT_FALSE(q.clamped);
    ASSERT_NEAR(q.pose.x(), p.x(), 1e-9);
    ASSERT_NEAR(q.pose.y(), p.y(), 1e-9);
    ASSERT_NEAR(ang_diff(q.pose.theta(), p.theta()), 0.0, 1e-9);
  }
}

TEST(EnvBounds, RejectsEmptyExtent) {
  EXPECT_EQ(kind_of([] { EnvBounds(1, 1, 0, 2); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { EnvBounds(0, 2, 3, 1); }), ErrorKind::kInvalidArgument);
}

TEST(CircularMean, Examples) {
  const std::vector<double> w2{1.0, 1.0};
  EXPECT_NEAR(circular_mean(std::vector<double>{350, 10}, w2), 0.0, 1e-12);
  EXPECT_NEAR(circular_mean(std::vector<double>{-37.5}, std::vector<double>{2.0}), -37.5, 1e-12);
  // Mean unit vector of 0 and 90 degrees is (0.5, 0.5).
  EXPECT_NEAR(circular_mean(std::vector<double>{0, 90}, w2), std::atan2(0.5, 0.5) * 180.0 / std::acos(-1.0), 1e-12);
}

TEST(CircularMean, Errors) {
  const std::vector<double> w2{1.0, 1.0};
  EXPECT_EQ(kind_of([&] { circular_mean(std::vector<double>{0, 180}, w2); }), ErrorKind::kDegenerate);
  EXPECT_EQ(kind_of([&] { circular_mean(std::vector<double>{}, std::vector<double>{}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { circular_mean(std::vector<double>{0, 1}, std::vector<double>{1, -1}); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { circular_mean(std::vector<double>{0, 1}, std::vector<double>{0, 0}); }),
            ErrorKind::kInvalidArgument);
}

TEST(CircularMean, RotationEquivariant) {
  Rng rng(16);
  int checked = 0;
  for (int n = 0; n < 10000; ++n) {
    const int k = 1 + static_cast<int>(rng.below(6));
    std::vector<double> a, w, shifted;
    for (int i = 0; i < k; ++i) {
      a.push_back(rng.uniform(-180, 180));
      w.push_back(rng.uniform(0.1, 2.0));
    }
    const double c = rng.uniform(-720, 720);
    for (double v : a) shifted.push_back(v + c);
    double m;
    try {
      m = circular_mean(a, w);
    } catch (const Error&) {
      continue;
    }
    // Near-cancelling vectors make the angle ill-conditioned; skip those.
    double sx = 0, sy = 0, sw = 0;
    for (int i = 0; i < k; ++i) {
      sx += w[i] * std::cos(a[i] * std::acos(-1.0) / 180.0);
      sy += w[i] * std::sin(a[i] * std::acos(-1.0) / 180.0);
      sw += w[i];
    }
    if (std::hypot(sx, sy) / sw < 1e-3) continue;
    ASSERT_NEAR(ang_diff(circular_mean(shifted, w), wrap_angle(m + c)), 0.0, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 9000);
}

TEST(Rng, DeterministicAndStreamsIndependent) {
  Rng a(99), b(99), c(100);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(99).next(), c.next());
  EXPECT_NE(Rng::stream(5, 0).next(), Rng::stream(5, 1).next());
  EXPECT_EQ(Rng::stream(5, 3).next(), Rng::stream(5, 3).next());
}

TEST(Rng, UniformRangesAndBelow) {
  Rng rng(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[rng.below(7)];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 3.0 / std::sqrt(n) * 1.5);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(3);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  shuffle(v.begin(), v.end(), rng);
  std::set<int> s(v.begin(), v.end());
  EXPECT_EQ(s.size(), 100u);
  bool moved = false;
  for (int i = 0; i < 100; ++i) moved = moved || v[i] != i;
  EXPECT_TRUE(moved);
}

TEST(FormatSig, DecimalNotationRoundTrips) {
  EXPECT_EQ(textio::format_sig(0.25, 9), "0.25");
  EXPECT_EQ(textio::format_sig(-0.0, 9), "0");
  EXPECT_EQ(textio::format_sig(1e-12, 9), "0.000000000001");
  EXPECT_EQ(textio::format_sig(123456789012.0, 9), "123456789000");
  EXPECT_EQ(textio::format_sig(-1e-20, 3), "-0." + std::string(19, '0') + "1");
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-1000, 1000) * std::pow(10.0, rng.uniform(-8, 4));
    const std::string s = textio::format_sig(v, 9);
    ASSERT_EQ(s.find('e'), std::string::npos);
    const double back = textio::parse_double(s, "t");
    ASSERT_EQ(textio::format_sig(back, 9), s);
    ASSERT_NEAR(back, v, std::abs(v) * 1e-8);
  }
}
