#include <gtest/gtest.h>

#include "polyreg/error.hpp"
#include "polyreg/frame.hpp"
#include "polyreg/models.hpp"
#include "test_support.hpp"

using namespace polyreg;

namespace {

double parseval_error(const TightFrame& t, SplitMix64& rng) {
  const Vec s = rng.normal_vector(t.pixel_count());
  return (t.synthesize(t.analyze(s)) - s).norm() / s.norm();
}

}  // namespace

TEST(Frame, PresetsAreParseval) {
  SplitMix64 rng(1);
  for (const char* name : {"identity", "haar2", "dct3"}) {
    const TightFrame t(frame_preset(name), 16, 16);
    for (int k = 0; k < 10; ++k) EXPECT_LE(parseval_error(t, rng), 1e-10) << name;
    const Mat& U = t.U();
    EXPECT_LE((U.transpose() * U - Mat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Frame, NonSquareImagesAndOddSizes) {
  SplitMix64 rng(2);
  const TightFrame t(frame_preset("dct3"), 17, 11);
  EXPECT_LE(parseval_error(t, rng), 1e-10);
}

TEST(Frame, HaarMatrixEntries) {
  Mat expect(4, 4);
  expect << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  expect *= 0.5;
  // Rows may be ordered differently after the first; compare as sets of rows.
  const Mat h = haar2_matrix();
  EXPECT_LE((h.row(0) - expect.row(0)).norm(), 1e-15);
  for (int r = 1; r < 4; ++r) {
    double best = 1e9;
    for (int q = 1; q < 4; ++q) best = std::min({best, (h.row(r) - expect.row(q)).norm(), (h.row(r) + expect.row(q)).norm()});
    EXPECT_LE(best, 1e-15);
  }
}

TEST(Frame, MovingAverageChannel) {
  const TightFrame t(frame_preset("haar2"), 8, 8);
  const Mat m0 = t.mask(0);
  EXPECT_LE((m0.array() - m0(0, 0)).abs().maxCoeff(), 1e-15);
  EXPECT_GT(m0(0, 0), 0.0);
  // Channel 0 of a constant image is the constant.
  const ChannelStack z = t.analyze(Image(8, 8, 0.7));
  EXPECT_LE((z.channel(0).array() - 0.7).abs().maxCoeff(), 1e-14);
  for (int c = 1; c < 4; ++c) EXPECT_LE(z.channel(c).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Frame, IdentityFrameIsIdentity) {
  SplitMix64 rng(3);
  const TightFrame t(frame_preset("identity"), 6, 5);
  const Vec s = rng.normal_vector(30);
  EXPECT_EQ(t.analyze(s), s);
}

TEST(Frame, AdjointIdentity) {
  SplitMix64 rng(4);
  for (const char* name : {"haar2", "dct3"}) {
    const TightFrame t(frame_preset(name), 12, 9);
    const Vec s = rng.normal_vector(t.pixel_count());
    const Vec z = rng.normal_vector(t.coefficient_count());
    EXPECT_NEAR(t.analyze(s).dot(z), s.dot(t.synthesize(z)), 1e-10 * s.norm() * z.norm());
  }
}

TEST(Frame, RangeProjection) {
  SplitMix64 rng(5);
  const TightFrame t(frame_preset("haar2"), 8, 8);
  Image s(8, 8);
  s.data = rng.normal_vector(64);
  const ChannelStack in_range = t.analyze(s);
  EXPECT_LE((range_projection(t, in_range).data - in_range.data).norm(), 1e-12);
  ChannelStack z(4, 8, 8);
  z.data = rng.normal_vector(z.data.size());
  const ChannelStack p = range_projection(t, z);
  EXPECT_LE((range_projection(t, p).data - p.data).norm(), 1e-10 * z.data.norm());

  const TightFrame id(frame_preset("identity"), 8, 8);
  ChannelStack z1(1, 8, 8);
  z1.data = rng.normal_vector(64);
  EXPECT_LE((range_projection(id, z1).data - z1.data).norm(), 1e-15);
}

TEST(Frame, RejectsNonOrthogonalMatrix) {
  Mat u = haar2_matrix();
  u(1, 2) += 0.5;
  try {
    TightFrame t(u, 8, 8);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("Parseval"), std::string::npos);
  }
}

TEST(Frame, RejectsNonConstantFirstRowWhenZeroMean) {
  Mat u = haar2_matrix();
  u.row(0).swap(u.row(1));
  EXPECT_THROW(TightFrame(u, 8, 8, true), PreconditionError);
  EXPECT_NO_THROW(TightFrame(u, 8, 8, false));
}

TEST(Orthogonalize, Examples) {
  const Mat q = haar2_matrix();
  EXPECT_LE((orthogonalize(q) - q).cwiseAbs().maxCoeff(), 1e-12);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  EXPECT_LE((orthogonalize(d) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  SplitMix64 rng(6);
  const Mat u = orthogonalize(fixtures::random_matrix(rng, 9, 9));
  EXPECT_LE((u.transpose() * u - Mat::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(orthogonalize(Mat::Zero(3, 3)), RankError);
}

TEST(Frame, PiecewiseConstantPhantomIsSparseInHaarDetails) {
  const TightFrame t(frame_preset("haar2"), 64, 64);
  const Image s = make_phantom(PhantomKind::kPiecewiseConstant, 64, 64, 3);
  const ChannelStack z = t.analyze(s);
  Index zeros = 0;
  for (int c = 1; c < 4; ++c) zeros += (z.channel(c).array() == 0.0).count();
  EXPECT_GT(static_cast<double>(zeros) / (3.0 * 64 * 64), 0.5);
}
