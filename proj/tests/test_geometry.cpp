#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polyreg/error.hpp"
#include "polyreg/geometry.hpp"
#include "test_support.hpp"

using namespace polyreg;
using polyreg::fixtures::sorted_columns;
using polyreg::fixtures::vec;

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Hexagon with vertices at radius 1/sqrt(3) and angles 0, 60, 120 degrees.
VertexDictionary hexagon() {
  Mat v(2, 3);
  for (int k = 0; k < 3; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    v.col(k) << std::cos(a) / kSqrt3, std::sin(a) / kSqrt3;
  }
  return {v};
}

// Its facets: edge normals at 30, 90, 150 degrees with plane offset 1/2.
FacetMatrix hexagon_facets() {
  Mat f(2, 3);
  f << kSqrt3, 0.0, -kSqrt3, 1.0, 2.0, 1.0;
  return {f};
}

// Gauge of a polygon by bisection on membership, membership by
// the facet inequalities of its own convex hull (independent of the LP).
double brute_force_gauge(const Mat& vertices, const Vec& x) {
  std::vector<Vec> pts;
  for (Index j = 0; j < vertices.cols(); ++j) {
    pts.push_back(vertices.col(j));
    pts.push_back(-vertices.col(j));
  }
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
  auto inside = [&](const Vec& p) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec& a = pts[i];
      const Vec& b = pts[(i + 1) % pts.size()];
      if ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(x / mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

TEST(AnalysisNorm, IdentityFacetsGiveLinf) { EXPECT_DOUBLE_EQ(analysis_norm({Mat::Identity(2, 2)}, vec({3, -4})), 4.0); }

TEST(AnalysisNorm, WitnessFacetsGiveL1) {
  Mat f(2, 2);
  f << 1, 1, 1, -1;
  EXPECT_DOUBLE_EQ(analysis_norm({f}, vec({3, -4})), 7.0);
}

TEST(AnalysisNorm, HexagonVertexHasUnitNorm) {
  EXPECT_NEAR(analysis_norm(hexagon_facets(), vec({1.0 / kSqrt3, 0.0})), 1.0, 1e-15);
}

TEST(WeightedL1Norm, Examples) {
  EXPECT_DOUBLE_EQ(weighted_l1_norm({Mat::Identity(3, 3)}, vec({1, -2, 3})), 6.0);
  Mat L(3, 2);
  L << 0, 1, -kSqrt3 / 2, -0.5, kSqrt3 / 2, -0.5;
  EXPECT_NEAR(weighted_l1_norm({L}, vec({1, 0})), kSqrt3, 1e-15);
  EXPECT_EQ(weighted_l1_norm({L}, vec({0, 0})), 0.0);
}

TEST(SynthesisNorm, CanonicalBasisGivesL1) {
  SplitMix64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.normal_vector(4);
    EXPECT_NEAR(synthesis_norm({Mat::Identity(4, 4)}, x).norm, x.lpNorm<1>(), 1e-12);
  }
}

TEST(SynthesisNorm, HypercubeVerticesGiveLinf) {
  Mat v(2, 2);
  v << 1, 1, 1, -1;
  const SynthesisResult r = synthesis_norm({v}, vec({3, -4}));
  EXPECT_NEAR(r.norm, 4.0, 1e-12);
  EXPECT_NEAR((v * r.codes - vec({3, -4})).norm(), 0.0, 1e-12);
}

TEST(SynthesisNorm, HexagonMatchesBruteForceGauge) {
  const VertexDictionary h = hexagon();
  EXPECT_NEAR(synthesis_norm(h, vec({1.0 / kSqrt3, 0.0})).norm, 1.0, 1e-12);
  SplitMix64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vec x = rng.normal_vector(2);
    EXPECT_NEAR(synthesis_norm(h, x).norm, brute_force_gauge(h.cols, x), 1e-10);
  }
}

TEST(SynthesisNorm, ZeroAndRankDeficiency) {
  Mat v(2, 2);
  v << 1, 2, 2, 4;
  EXPECT_EQ(synthesis_norm({Mat::Identity(2, 2)}, vec({0, 0})).norm, 0.0);
  EXPECT_THROW(synthesis_norm({v}, vec({1, 0})), RankError);
}

TEST(ZonotopeGauge, Examples) {
  SplitMix64 rng(3);
  const Vec y = rng.normal_vector(3);
  EXPECT_NEAR(zonotope_gauge({Mat::Identity(3, 3)}, y).gauge, y.lpNorm<Eigen::Infinity>(), 1e-12);
  Mat L(2, 1);
  L << 1, 1;
  EXPECT_NEAR(zonotope_gauge({L}, vec({3})).gauge, 1.5, 1e-12);
}

TEST(ZonotopeGauge, HoelderEqualityOverAllSignPatterns) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const RegularizationOperator L{fixtures::random_matrix(rng, 3, 2)};
    const Vec x = rng.normal_vector(2);
    // Brute force: max over sign patterns t of <x, L^T t> / gauge(L^T t) equals ||Lx||_1.
    double best = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
      Vec t(3);
      for (int n = 0; n < 3; ++n) t[n] = (mask >> n) & 1 ? 1.0 : -1.0;
      const Vec y = L.rows.transpose() * t;
      const double g = zonotope_gauge(L, y).gauge;
      if (g > 1e-12) best = std::max(best, x.dot(y) / g);
    }
    EXPECT_NEAR(best, weighted_l1_norm(L, x), 1e-9);
  }
}

TEST(ExtremePoints, Examples) {
  Mat g(2, 3);
  g << 1, 0, 0.5, 0, 1, 0.5;
  EXPECT_EQ(extreme_points({g}).size(), 2);

  Mat dup(2, 3);
  dup << 1, -1, 0, 0, 0, 1;
  const VertexDictionary r = extreme_points({dup});
  EXPECT_EQ(sorted_columns(r.cols), sorted_columns(Mat::Identity(2, 2)));

  EXPECT_EQ(extreme_points(hexagon()).size(), 3);
}

TEST(ExtremePoints, Idempotent) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const VertexDictionary once = extreme_points({fixtures::random_matrix(rng, 3, 9)});
    const VertexDictionary twice = extreme_points(once);
    EXPECT_EQ(sorted_columns(once.cols), sorted_columns(twice.cols));
  }
}

TEST(Canonicalize, FlipsAndMerges) {
  Mat g(2, 4);
  g << -1, 1, 0, 0, 2, -2, 0, -3;
  const VertexDictionary c = canonicalize({g});
  ASSERT_EQ(c.size(), 2);
  for (Index j = 0; j < c.size(); ++j) {
    const Index first = c.cols(0, j) != 0.0 ? 0 : 1;
    EXPECT_GT(c.cols(first, j), 0.0);
  }
}

TEST(FacetsFromVertices, CrossPolytopeGivesHypercubeFacets) {
  const FacetMatrix f = facets_from_vertices({Mat::Identity(2, 2)});
  Mat expect(2, 2);
  expect << 1, 1, 1, -1;
  EXPECT_EQ(sorted_columns(canonicalize({f.cols}).cols), sorted_columns(expect));
}

TEST(FacetsFromVertices, HypercubeGivesCanonicalFacets) {
  Mat v(2, 2);
  v << 1, 1, 1, -1;
  const FacetMatrix f = facets_from_vertices({v});
  const auto got = sorted_columns(canonicalize({f.cols}).cols);
  const auto want = sorted_columns(Mat::Identity(2, 2));
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(got[i][k], want[i][k], 1e-12);
}

TEST(FacetsFromVertices, HexagonFacetNormals) {
  const FacetMatrix f = facets_from_vertices(hexagon());
  const auto got = sorted_columns(canonicalize({f.cols}).cols);
  const auto want = sorted_columns(canonicalize({hexagon_facets().cols}).cols);
  ASSERT_EQ(got.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(got[i][k], want[i][k], 1e-12);
}

TEST(FacetsFromVertices, ThreeDimensionalCrossPolytope) {
  const FacetMatrix f = facets_from_vertices({Mat::Identity(3, 3)});
  EXPECT_EQ(f.size(), 4);
  SplitMix64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const Vec x = rng.normal_vector(3);
    EXPECT_NEAR(analysis_norm(f, x), x.lpNorm<1>(), 1e-12);
  }
}

TEST(FacetsFromVertices, GaugeConsistencyAndDualityInequality) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 2;
    const VertexDictionary v = extreme_points({fixtures::random_matrix(rng, d, 6)});
    const FacetMatrix f = facets_from_vertices(v);
    for (int k = 0; k < 200; ++k) {
      const Vec x = rng.normal_vector(d);
      const double s = synthesis_norm(v, x).norm;
      EXPECT_NEAR(analysis_norm(f, x) / s, 1.0, 1e-8);
    }
    for (Index j = 0; j < v.size(); ++j) EXPECT_LE((f.cols.transpose() * v.cols.col(j)).cwiseAbs().maxCoeff(), 1.0 + 1e-9);
  }
}

TEST(FacetsFromVertices, RejectsUnsupportedDimension) {
  EXPECT_THROW(facets_from_vertices({Mat::Identity(4, 4)}), PreconditionError);
}

TEST(MeasureEquivalence, ExactRepresentation) {
  Mat f(2, 2);
  f << 1, 1, 1, -1;
  const NormEquivalenceReport r = measure_equivalence([&](const Vec& x) { return analysis_norm({f}, x); },
                                                      [](const Vec& x) { return x.lpNorm<1>(); }, 2, 500, 1);
  EXPECT_NEAR(r.c0, 1.0, 1e-12);
  EXPECT_NEAR(r.C0, 1.0, 1e-12);
  EXPECT_NEAR(r.epsilon, 0.0, 1e-12);
}

TEST(MeasureEquivalence, HexagonRatio) {
  // Regular hexagon inscribed in the unit circle: C0 / c0 = sec(pi / 6).
  Mat v(2, 3);
  for (int k = 0; k < 3; ++k) v.col(k) << std::cos(k * std::numbers::pi / 3), std::sin(k * std::numbers::pi / 3);
  const FacetMatrix f = facets_from_vertices({v});
  const NormEquivalenceReport r = measure_equivalence([&](const Vec& x) { return analysis_norm(f, x); },
                                                      [](const Vec& x) { return x.norm(); }, 2, 20000, 2);
  // Random directions miss the exact extremes by an O(gap^2) amount.
  EXPECT_NEAR(r.C0 / r.c0, 1.0 / std::cos(std::numbers::pi / 6), 1e-4);
  EXPECT_LE(r.C0 / r.c0, 1.0 / std::cos(std::numbers::pi / 6) + 1e-12);
}

TEST(ApproximateBall, Examples) {
  const VertexDictionary two = approximate_ball(2, 2, 2.0, 0);
  EXPECT_EQ(sorted_columns(two.cols), sorted_columns(Mat::Identity(2, 2)));

  const VertexDictionary v = approximate_ball(2, 32, 2.0, 0);
  const FacetMatrix f = facets_from_vertices(v);
  const NormEquivalenceReport r = measure_equivalence([&](const Vec& x) { return analysis_norm(f, x); },
                                                      [](const Vec& x) { return x.norm(); }, 2, 20000, 3);
  const double analytic = 1.0 / std::cos(std::numbers::pi / 64) - 1.0;
  EXPECT_NEAR(r.epsilon, analytic, 0.02 * analytic);
}

TEST(ApproximateBall, L1TargetWithCanonicalVerticesIsExact) {
  const NormEquivalenceReport r =
      measure_equivalence([](const Vec& x) { return synthesis_norm({Mat::Identity(3, 3)}, x).norm; },
                          [](const Vec& x) { return x.lpNorm<1>(); }, 3, 1000, 4);
  EXPECT_NEAR(r.epsilon, 0.0, 1e-12);
  // The lattice on the l1 sphere reduces to the canonical vertices.
  EXPECT_EQ(approximate_ball(2, 8, 1.0, 0).size(), 2);
}

TEST(Witness, Shapes) {
  const auto [f1, v1] = l1_linf_witness(1);
  EXPECT_EQ(f1.cols, Mat::Ones(1, 1));
  const auto [f2, v2] = l1_linf_witness(2);
  Mat expect(2, 2);
  expect << 1, 1, 1, -1;
  EXPECT_EQ(sorted_columns(f2.cols), sorted_columns(expect));
  const auto [f3, v3] = l1_linf_witness(3);
  EXPECT_EQ(f3.size(), 4);
  SplitMix64 rng(8);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = rng.normal_vector(3);
    EXPECT_NEAR(analysis_norm(f3, x), x.lpNorm<1>(), 1e-12);
  }
}

TEST(NormAxioms, AllParameterizations) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat m = fixtures::random_matrix(rng, 3, 5);
    const std::vector<NormFunction> norms{
        [&](const Vec& x) { return analysis_norm({m}, x); },
        [&](const Vec& x) { return synthesis_norm({m}, x).norm; },
        [&](const Vec& x) { return weighted_l1_norm({m.transpose()}, x); },
        [&](const Vec& x) { return zonotope_gauge({m.transpose()}, x).gauge; },
    };
    for (const NormFunction& p : norms) {
      const Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
      const double a = rng.normal();
      EXPECT_NEAR(p(a * x), std::abs(a) * p(x), 1e-10 * std::max(1.0, std::abs(a) * p(x)));
      EXPECT_LE(p(x + y), p(x) + p(y) + 1e-10);
      EXPECT_EQ(p(Vec::Zero(3)), 0.0);
      EXPECT_GT(p(x), 0.0);
    }
  }
}

TEST(FitWeightedL1, LinfIsExactInTwoDimensions) {
  const NormFunction linf = [](const Vec& x) { return x.lpNorm<Eigen::Infinity>(); };
  const L1FitResult fit = fit_weighted_l1(linf, 2, 10, 400, 2, 1);
  EXPECT_LE(fit.max_relative_deviation, 1e-6);
}

TEST(FitWeightedL1, LinfStaysApproximateInThreeDimensions) {
  const NormFunction linf = [](const Vec& x) { return x.lpNorm<Eigen::Infinity>(); };
  const L1FitResult fit = fit_weighted_l1(linf, 3, 12, 400, 2, 1);
  EXPECT_GE(fit.max_relative_deviation, 1e-3);
}
