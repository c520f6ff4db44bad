#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "polyreg/image.hpp"
#include "polyreg/types.hpp"

namespace polyreg {

enum class MaskKind { kRandom, kRadial, kCartesian, kCustom };

std::string mask_kind_name(MaskKind kind);
MaskKind parse_mask_kind(const std::string& name);

// Boolean grid over DFT frequencies in the centered convention: entry (i, j)
// is the frequency (i - h/2, j - w/2), so DC sits at (h/2, w/2).
struct SamplingMask {
  int h = 0;
  int w = 0;
  MaskKind kind = MaskKind::kCustom;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> kept;

  bool at(int i, int j) const { return kept[static_cast<std::size_t>(i) * w + j] != 0; }
  std::size_t count() const;
  double kept_fraction() const;
  bool dc_kept() const { return at(h / 2, w / 2); }
  bool operator==(const SamplingMask&) const = default;
};

struct MaskParams {
  double density = 0.3;  // random, cartesian
  int n_lines = 30;      // radial
  double sigma_c = 0.0;  // cartesian profile width in columns, 0 selects w / 16
};

/// Builds a sampling mask. Every mask is completed to be Hermitian
/// symmetric (frequency k kept iff -k kept) and keeps DC.
SamplingMask make_mask(MaskKind kind, int h, int w, const MaskParams& params, std::uint64_t seed);

/// Adds the conjugate partner of every kept frequency and forces DC on.
void hermitian_complete(SamplingMask& mask);

enum class ForwardKind { kIdentity, kMaskedDft, kMatrix };

class Fft2;

/// Linear measurement operator H acting on flattened h x w images.
///
///  identity    H = I
///  masked_dft  H = M F / sqrt(h w), unitary DFT restricted to the kept
///              frequencies. Measurements are interleaved (re, im) pairs in
///              centered row-major order of the kept entries.
///  matrix      dense H, for small problems
class ForwardModel {
 public:
  static ForwardModel identity(int h, int w);
  static ForwardModel masked_dft(SamplingMask mask);
  static ForwardModel matrix(Mat H, int h, int w);

  ForwardKind kind() const { return kind_; }
  std::string kind_name() const;
  int h() const { return h_; }
  int w() const { return w_; }
  Index signal_size() const { return Index{h_} * w_; }
  Index measurement_size() const;
  const SamplingMask& mask() const { return mask_; }
  const Mat& dense() const { return H_; }

  Vec apply(const Vec& s) const;
  /// H^T. For masked_dft this is the real part of the zero-filled inverse DFT.
  Vec adjoint(const Vec& u) const;
  Vec apply(const Image& s) const { return apply(s.data); }
  Image adjoint_image(const Vec& u) const { return Image(h_, w_, adjoint(u)); }

  /// (I + tau H^T H)^{-1} rhs.
  Vec solve_regularized(const Vec& rhs, double tau) const;
  /// True when H^T H = I (identity or fully sampled DFT).
  bool is_isometry() const;

 private:
  ForwardKind kind_ = ForwardKind::kIdentity;
  int h_ = 0;
  int w_ = 0;
  SamplingMask mask_;
  std::vector<Index> kept_unshifted_;  // flat unshifted FFT indices of kept entries
  Vec gram_diag_;                      // symmetrized mask in unshifted order
  Mat H_;
  std::shared_ptr<const Fft2> fft_;
};

/// 2-D unitary DFT helpers on row-major complex arrays.
std::vector<std::complex<double>> dft2(const Vec& s, int h, int w);
Vec idft2_real(const std::vector<std::complex<double>>& spectrum, int h, int w);

/// Peak signal-to-noise ratio in dB; +infinity when the images coincide.
double psnr(const Image& reference, const Image& x, double peak = 1.0);

enum class PhantomKind { kPiecewiseConstant, kSheppLike };
PhantomKind parse_phantom_kind(const std::string& name);

/// Desk-scale test images with values in [0, 1]. h, w >= 16.
Image make_phantom(PhantomKind kind, int h, int w, std::uint64_t seed);

/// s + sigma * N(0, 1) per pixel, no clipping.
Image add_noise(const Image& s, double sigma, std::uint64_t seed);

/// Anisotropic TV denoising  min_s 1/2 ||y - s||^2 + lambda ||D s||_1  with
/// circular forward differences, solved by the primal-dual solver.
Image tv_denoise(const Image& y, double lambda, double tol = 1e-5, int max_iter = 5000);

/// TV-regularized reconstruction  min_s 1/2 ||y - H s||^2 + lambda ||D s||_1.
Image tv_reconstruct(const ForwardModel& model, const Vec& y, double lambda, double tol = 1e-5,
                     int max_iter = 5000);

}  // namespace polyreg
