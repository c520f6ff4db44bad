#include "polyreg/frame.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "polyreg/error.hpp"

namespace polyreg {
namespace {

constexpr double kOrthoTol = 1e-10;

int side_length(const Mat& U) {
  if (U.rows() != U.cols() || U.rows() == 0) throw DimensionError("TightFrame: U must be square and nonempty");
  const int W = static_cast<int>(std::lround(std::sqrt(static_cast<double>(U.rows()))));
  if (Index{W} * W != U.rows()) throw DimensionError("TightFrame: channel count must be a perfect square W^2");
  return W;
}

double orthogonality_defect(const Mat& U) {
  return (U.transpose() * U - Mat::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TightFrame::TightFrame(const Mat& U, int h, int w, bool zero_mean) {
  W_ = side_length(U);
  if (h < 1 || w < 1) throw DimensionError("TightFrame: image shape must be positive");
  if (orthogonality_defect(U) > kOrthoTol) {
    throw PreconditionError("TightFrame: U is not orthogonal, the Parseval identity T T^T = I would fail");
  }
  U_ = U;
  if (zero_mean) {
    const double first = U_(0, 0);
    if ((U_.row(0).array() - first).abs().maxCoeff() > kOrthoTol) {
      throw PreconditionError("TightFrame: first row of U must be constant (moving-average channel)");
    }
    if (first < 0.0) U_.row(0) *= -1.0;
  }
  h_ = h;
  w_ = w;
  build();
}

TightFrame TightFrame::unchecked(const Mat& U, int h, int w) {
  TightFrame f;
  f.W_ = side_length(U);
  f.U_ = U;
  f.h_ = h;
  f.w_ = w;
  f.build();
  return f;
}

void TightFrame::build() { masks_ = U_ / static_cast<double>(W_); }

Mat TightFrame::mask(int c) const {
  Mat m(W_, W_);
  for (int a = 0; a < W_; ++a)
    for (int b = 0; b < W_; ++b) m(a, b) = masks_(c, a * W_ + b);
  return m;
}

Vec TightFrame::analyze(const Vec& s) const {
  if (s.size() != pixel_count()) throw DimensionError("TightFrame::analyze: image size does not match the frame");
  const Index P = pixel_count();
  const int C = channels();
  Vec z = Vec::Zero(Index{C} * P);
  for (int a = 0; a < W_; ++a) {
    for (int b = 0; b < W_; ++b) {
      const int tap = a * W_ + b;
      for (int i = 0; i < h_; ++i) {
        const int si = (i + a) % h_;
        for (int j = 0; j < w_; ++j) {
          const double v = s[Index{si} * w_ + (j + b) % w_];
          const Index p = Index{i} * w_ + j;
          for (int c = 0; c < C; ++c) z[c * P + p] += masks_(c, tap) * v;
        }
      }
    }
  }
  return z;
}

Vec TightFrame::synthesize(const Vec& z) const {
  if (z.size() != coefficient_count()) {
    throw DimensionError("TightFrame::synthesize: coefficient stack does not match the frame");
  }
  const Index P = pixel_count();
  const int C = channels();
  Vec s = Vec::Zero(P);
  for (int a = 0; a < W_; ++a) {
    for (int b = 0; b < W_; ++b) {
      const int tap = a * W_ + b;
      for (int i = 0; i < h_; ++i) {
        const int si = (i + a) % h_;
        for (int j = 0; j < w_; ++j) {
          const Index p = Index{i} * w_ + j;
          double acc = 0.0;
          for (int c = 0; c < C; ++c) acc += masks_(c, tap) * z[c * P + p];
          s[Index{si} * w_ + (j + b) % w_] += acc;
        }
      }
    }
  }
  return s;
}

ChannelStack TightFrame::analyze(const Image& s) const {
  if (s.h != h_ || s.w != w_) throw DimensionError("TightFrame::analyze: image shape does not match the frame");
  ChannelStack z(channels(), h_, w_);
  z.data = analyze(s.data);
  return z;
}

Image TightFrame::synthesize(const ChannelStack& z) const {
  if (z.channels != channels() || z.h != h_ || z.w != w_) {
    throw DimensionError("TightFrame::synthesize: channel stack shape does not match the frame");
  }
  return Image(h_, w_, synthesize(z.data));
}

ChannelStack range_projection(const TightFrame& frame, const ChannelStack& z) {
  return frame.analyze(frame.synthesize(z));
}

Mat orthogonalize(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) throw DimensionError("orthogonalize: matrix must be square");
  const Index n = M.rows();
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[n - 1] < 1e-12 * sv[0]) throw RankError("orthogonalize: matrix is singular");

  // Power-method estimate of sigma_max from M^T M.
  Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
  double sigma2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec next = M.transpose() * (M * v);
    const double nrm = next.norm();
    if (nrm == 0.0) {
      // The all-ones start lies in a null direction of M^T M; restart on e_1.
      v = Vec::Unit(n, 0);
      continue;
    }
    const double prev = sigma2;
    sigma2 = nrm;
    v = next / nrm;
    if (std::abs(sigma2 - prev) <= 1e-14 * sigma2) break;
  }
  // The power estimate approaches sigma_max from below; the small margin keeps
  // every scaled singular value inside the convergence region (0, sqrt(3)).
  Mat U = M / (1.01 * std::sqrt(sigma2));
  const Mat I = Mat::Identity(n, n);
  for (int it = 0; it < 100; ++it) {
    if ((U.transpose() * U - I).cwiseAbs().maxCoeff() <= 1e-12) break;
    U = 1.5 * U - 0.5 * U * (U.transpose() * U);
  }
  return U;
}

TightFrame build_parseval_frame(const Mat& U, int h, int w, bool zero_mean) { return TightFrame(U, h, w, zero_mean); }

Mat haar2_matrix() {
  Mat U(4, 4);
  U << 1, 1, 1, 1,
       1, 1, -1, -1,
       1, -1, 1, -1,
       1, -1, -1, 1;
  return 0.5 * U;
}

Mat dct3_matrix() {
  const int W = 3;
  Mat basis1d(W, W);
  for (int k = 0; k < W; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / W) : std::sqrt(2.0 / W);
    for (int n = 0; n < W; ++n) basis1d(k, n) = scale * std::cos(std::numbers::pi * (n + 0.5) * k / W);
  }
  Mat U(W * W, W * W);
  for (int k1 = 0; k1 < W; ++k1)
    for (int k2 = 0; k2 < W; ++k2)
      for (int a = 0; a < W; ++a)
        for (int b = 0; b < W; ++b) U(k1 * W + k2, a * W + b) = basis1d(k1, a) * basis1d(k2, b);
  return orthogonalize(U);
}

Mat frame_preset(const std::string& name) {
  if (name == "identity") return Mat::Identity(1, 1);
  if (name == "haar2") return haar2_matrix();
  if (name == "dct3") return dct3_matrix();
  throw ParseError("unknown frame preset '" + name + "' (expected identity, haar2 or dct3)");
}

}  // namespace polyreg
