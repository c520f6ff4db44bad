#pragma once

#include <string>

#include "polyreg/image.hpp"
#include "polyreg/types.hpp"

namespace polyreg {

/// Undecimated Parseval filterbank on periodic images.
///
/// The W^2 masks are the rows of an orthogonal W^2 x W^2 matrix U, reshaped
/// to W x W and scaled by 1/W. Because the mask entries at any two tap
/// positions are orthogonal across channels, summing the channel
/// autocorrelations gives W^2 * delta / W^2 = delta, so that
/// synthesize(analyze(s)) = s for circular convolution.
class TightFrame {
 public:
  /// Validates U (orthogonality, and a constant first row when
  /// `zero_mean` is set) before building the masks.
  TightFrame(const Mat& U, int h, int w, bool zero_mean = true);

  /// Builds the masks without any check. Used to exercise corrupted frames.
  static TightFrame unchecked(const Mat& U, int h, int w);

  int W() const { return W_; }
  int channels() const { return W_ * W_; }
  int h() const { return h_; }
  int w() const { return w_; }
  const Mat& U() const { return U_; }
  /// Mask of channel c, W x W.
  Mat mask(int c) const;

  /// T^T: circular correlation of the image with every mask.
  ChannelStack analyze(const Image& s) const;
  /// T: adjoint of analyze.
  Image synthesize(const ChannelStack& z) const;

  /// Flat-vector versions (channel-major coefficient layout).
  Vec analyze(const Vec& s) const;
  Vec synthesize(const Vec& z) const;

  /// Coefficient count N = channels * h * w.
  Index coefficient_count() const { return Index{channels()} * h_ * w_; }
  Index pixel_count() const { return Index{h_} * w_; }

 private:
  TightFrame() = default;
  void build();

  int W_ = 1;
  int h_ = 0;
  int w_ = 0;
  Mat U_;
  Mat masks_;  // channels x W^2, row c is mask c in row-major tap order
};

/// Orthogonal projection onto the range of T^T, that is T^T T z.
ChannelStack range_projection(const TightFrame& frame, const ChannelStack& z);

/// Orthogonal polar factor of M by Bjorck / Newton-Schulz iteration
/// U <- 1.5 U - 0.5 U U^T U, after scaling by a power-method estimate of
/// sigma_max. Throws RankError when M is numerically singular.
Mat orthogonalize(const Mat& M);

/// Checks U and builds the frame; same as the TightFrame constructor.
TightFrame build_parseval_frame(const Mat& U, int h, int w, bool zero_mean = true);

/// Haar-type 4 x 4 orthogonal matrix (W = 2), moving average first.
Mat haar2_matrix();
/// 2-D DCT-II basis for 3 x 3 patches, DC row first, re-orthogonalized.
Mat dct3_matrix();
/// Named preset: "identity" (W = 1), "haar2" or "dct3".
Mat frame_preset(const std::string& name);

}  // namespace polyreg
