#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "polyreg/prox.hpp"
#include "test_support.hpp"

using namespace polyreg;
using polyreg::fixtures::vec;

namespace {

// Grid argmin: step 1e-2 over [lo, hi]^2, then step 1e-4 around the coarse
// winner. Adequate for the convex objectives below.
Vec grid_argmin_2d(const std::function<double(double, double)>& f, double lo, double hi) {
  auto scan = [&](double a0, double b0, double span, double step) {
    const long n = std::lround(2.0 * span / step);
    double best_v = 1e300;
    Vec best(2);
    for (long i = 0; i <= n; ++i)
      for (long j = 0; j <= n; ++j) {
        const double a = a0 - span + i * step, b = b0 - span + j * step;
        const double v = f(a, b);
        if (v < best_v) best_v = v, best << a, b;
      }
    return best;
  };
  const double mid = 0.5 * (lo + hi);
  const Vec coarse = scan(mid, mid, 0.5 * (hi - lo), 1e-2);
  return scan(coarse[0], coarse[1], 2e-2, 1e-4);
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_DOUBLE_EQ(soft_threshold(vec({1.5}), 1.0)[0], 0.5);
  EXPECT_DOUBLE_EQ(soft_threshold(vec({-0.3}), 1.0)[0], 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(vec({2.0}), 0.0)[0], 2.0);
  EXPECT_DOUBLE_EQ(soft_threshold(vec({-2.0, 2.0}), vec({0.5, 1.0}), 2.0)[0], -1.0);
  EXPECT_DOUBLE_EQ(soft_threshold(vec({-2.0, 2.0}), vec({0.5, 1.0}), 2.0)[1], 0.0);
}

TEST(ProjectL1Ball, Examples) {
  const Vec a = project_l1_ball(vec({3, 0}), 1.0);
  EXPECT_NEAR(a[0], 1.0, 1e-15);
  EXPECT_NEAR(a[1], 0.0, 1e-15);
  EXPECT_EQ(project_l1_ball(vec({0.2, 0.1}), 1.0), vec({0.2, 0.1}));
  const Vec c = project_l1_ball(vec({1, 1}), 1.0);
  EXPECT_NEAR(c[0], 0.5, 1e-15);
  EXPECT_NEAR(c[1], 0.5, 1e-15);
}

TEST(ProjectL1Ball, VariationalInequality) {
  // p is the projection iff p lies in the ball and (x - p).(q - p) <= 0 for
  // every q in the ball; checking the 2d vertices suffices.
  SplitMix64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vec x = 2.0 * rng.normal_vector(4);
    const double r = 0.6;
    const Vec p = project_l1_ball(x, r);
    EXPECT_LE(p.lpNorm<1>(), r + 1e-12);
    for (int i = 0; i < 4; ++i)
      for (double s : {-r, r}) {
        Vec q = Vec::Zero(4);
        q[i] = s;
        EXPECT_LE((x - p).dot(q - p), 1e-12);
      }
  }
  const Vec p = project_l1_ball(vec({0.9, -0.35}), 0.6);
  EXPECT_NEAR(p[0], 0.575, 1e-12);
  EXPECT_NEAR(p[1], -0.025, 1e-12);
}

TEST(ProxLinf, Examples) {
  const Vec a = prox_linf(vec({3, 0}), 1.0);
  EXPECT_NEAR(a[0], 2.0, 1e-15);
  EXPECT_NEAR(a[1], 0.0, 1e-15);
  EXPECT_EQ(prox_linf(vec({0.5, 0.2}), 1.0), vec({0, 0}));
  EXPECT_EQ(prox_linf(vec({0.5, -0.2}), 0.0), vec({0.5, -0.2}));
}

TEST(ProxLinf, MatchesGridSearch) {
  const Vec x = vec({1.1, 0.7});
  const Vec p = prox_linf(x, 0.5);
  const Vec g = grid_argmin_2d(
      [&](double a, double b) {
        return 0.5 * ((x[0] - a) * (x[0] - a) + (x[1] - b) * (x[1] - b)) + 0.5 * std::max(std::abs(a), std::abs(b));
      },
      -1.5, 1.5);
  EXPECT_LE((p - g).lpNorm<Eigen::Infinity>(), 1e-3);
  // Both coordinates are clipped to the same level: (0.65, 0.65).
  EXPECT_NEAR(p[0], 0.65, 1e-12);
  EXPECT_NEAR(p[1], 0.65, 1e-12);
}

TEST(ProxLinf, MoreauDecomposition) {
  SplitMix64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vec z = rng.normal_vector(6);
    EXPECT_LE((prox_linf(z, 0.7) + project_l1_ball(z, 0.7) - z).norm(), 1e-13);
  }
}

TEST(ProjectLinfBall, Clamps) { EXPECT_EQ(project_linf_ball(vec({-3, 0.5, 2}), 1.0), vec({-1, 0.5, 1})); }

TEST(Huber, ProxApproachesSoftThresholdForSmallMu) { EXPECT_NEAR(huber_prox(1.5, 1.0, 1e-6), 0.5, 1e-5); }

TEST(Huber, ProxIsFirmlyNonexpansiveAndUnbiased) {
  EXPECT_EQ(huber_prox(0.0, 0.7, 0.1), 0.0);
  for (double a = -3; a <= 3; a += 0.05)
    for (double b = a; b <= 3; b += 0.37) {
      const double pa = huber_prox(a, 0.7, 0.1), pb = huber_prox(b, 0.7, 0.1);
      EXPECT_LE(pa, pb + 1e-15);
      EXPECT_LE((pb - pa) * (pb - pa), (pb - pa) * (b - a) + 1e-15);
    }
}

TEST(Huber, GradientMatchesFiniteDifferences) {
  for (double z : {-2.0, -0.3, -0.05, 0.01, 0.07, 0.5, 3.0}) {
    const double h = 1e-6;
    const double fd = (huber_value(z + h, 0.1) - huber_value(z - h, 0.1)) / (2 * h);
    EXPECT_NEAR(fd, huber_derivative(z, 0.1), 1e-5 * std::max(1.0, std::abs(fd)));
  }
}
