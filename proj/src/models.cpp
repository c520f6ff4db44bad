#include "polyreg/models.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <Eigen/Cholesky>

#include "polyreg/error.hpp"
#include "polyreg/random.hpp"
#include "polyreg/solvers.hpp"

namespace polyreg {

// FFTW plans for one image shape. Planning is not thread-safe in FFTW, so
// creation and destruction are serialized; execution uses the new-array
// interface, which is.
class Fft2 {
 public:
  Fft2(int h, int w) : h_(h), w_(w) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    const std::size_t n = static_cast<std::size_t>(h) * w;
    auto* buf = fftw_alloc_complex(n);
    forward_ = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
  }
  ~Fft2() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  // In-place unitary transforms.
  void forward(std::vector<std::complex<double>>& data) const { run(forward_, data); }
  void backward(std::vector<std::complex<double>>& data) const { run(backward_, data); }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  void run(fftw_plan plan, std::vector<std::complex<double>>& data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(h_) * w_);
    for (auto& v : data) v *= scale;
  }

  int h_;
  int w_;
  fftw_plan forward_;
  fftw_plan backward_;
};

namespace {

int to_unshifted(int c, int n) { return ((c - n / 2) % n + n) % n; }
int to_centered(int u, int n) { return (u + n / 2) % n; }

void require_signal(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) + " entries, got " +
                         std::to_string(got));
  }
}

// Bresenham rasterization between two grid points (inclusive).
void draw_line(SamplingMask& m, int i0, int j0, int i1, int j1) {
  const int di = std::abs(i1 - i0);
  const int dj = std::abs(j1 - j0);
  const int si = i0 < i1 ? 1 : -1;
  const int sj = j0 < j1 ? 1 : -1;
  int err = dj - di;
  int i = i0;
  int j = j0;
  while (true) {
    if (i >= 0 && i < m.h && j >= 0 && j < m.w) m.kept[static_cast<std::size_t>(i) * m.w + j] = 1;
    if (i == i1 && j == j1) break;
    const int e2 = 2 * err;
    if (e2 > -di) {
      err -= di;
      j += sj;
    }
    if (e2 < dj) {
      err += dj;
      i += si;
    }
  }
}

}  // namespace

std::string mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::kRandom: return "random";
    case MaskKind::kRadial: return "radial";
    case MaskKind::kCartesian: return "cartesian";
    case MaskKind::kCustom: return "custom";
  }
  return "custom";
}

MaskKind parse_mask_kind(const std::string& name) {
  if (name == "random") return MaskKind::kRandom;
  if (name == "radial") return MaskKind::kRadial;
  if (name == "cartesian") return MaskKind::kCartesian;
  if (name == "custom") return MaskKind::kCustom;
  throw ParseError("unknown mask kind '" + name + "' (expected random, radial or cartesian)");
}

std::size_t SamplingMask::count() const {
  return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), std::uint8_t{1}));
}

double SamplingMask::kept_fraction() const {
  return kept.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(kept.size());
}

void hermitian_complete(SamplingMask& mask) {
  std::vector<std::uint8_t> out = mask.kept;
  for (int i = 0; i < mask.h; ++i) {
    for (int j = 0; j < mask.w; ++j) {
      if (!mask.at(i, j)) continue;
      const int ci = to_centered((mask.h - to_unshifted(i, mask.h)) % mask.h, mask.h);
      const int cj = to_centered((mask.w - to_unshifted(j, mask.w)) % mask.w, mask.w);
      out[static_cast<std::size_t>(ci) * mask.w + cj] = 1;
    }
  }
  out[static_cast<std::size_t>(mask.h / 2) * mask.w + mask.w / 2] = 1;
  mask.kept = std::move(out);
}

SamplingMask make_mask(MaskKind kind, int h, int w, const MaskParams& params, std::uint64_t seed) {
  if (h < 1 || w < 1) throw PreconditionError("make_mask: shape must be positive");
  SamplingMask m;
  m.h = h;
  m.w = w;
  m.kind = kind;
  m.seed = seed;
  m.kept.assign(static_cast<std::size_t>(h) * w, 0);
  SplitMix64 rng(seed);

  switch (kind) {
    case MaskKind::kRandom: {
      if (!(params.density > 0.0 && params.density <= 1.0)) {
        throw PreconditionError("make_mask: random density must lie in (0, 1]");
      }
      // One Bernoulli draw per conjugate pair, taken at the first member
      // visited in centered row-major order.
      std::vector<std::uint8_t> drawn(m.kept.size(), 0);
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * w + j;
          if (drawn[idx]) continue;
          const int ci = to_centered((h - to_unshifted(i, h)) % h, h);
          const int cj = to_centered((w - to_unshifted(j, w)) % w, w);
          const std::size_t partner = static_cast<std::size_t>(ci) * w + cj;
          const std::uint8_t keep = rng.uniform() < params.density ? 1 : 0;
          m.kept[idx] = m.kept[partner] = keep;
          drawn[idx] = drawn[partner] = 1;
        }
      }
      break;
    }
    case MaskKind::kRadial: {
      if (params.n_lines < 1) throw PreconditionError("make_mask: radial mask needs n_lines >= 1");
      const double ci = h / 2;
      const double cj = w / 2;
      for (int k = 0; k < params.n_lines; ++k) {
        const double theta = k * std::numbers::pi / params.n_lines;
        const double di = -std::sin(theta);
        const double dj = std::cos(theta);
        // Largest |t| keeping center + t * dir inside the grid, per side.
        auto reach = [&](double sign) {
          double t = std::numeric_limits<double>::infinity();
          const double vi = sign * di;
          const double vj = sign * dj;
          if (vi > 1e-12) t = std::min(t, (h - 1 - ci) / vi);
          if (vi < -1e-12) t = std::min(t, -ci / vi);
          if (vj > 1e-12) t = std::min(t, (w - 1 - cj) / vj);
          if (vj < -1e-12) t = std::min(t, -cj / vj);
          return t;
        };
        const double tp = reach(1.0);
        const double tm = reach(-1.0);
        draw_line(m, static_cast<int>(std::lround(ci - tm * di)), static_cast<int>(std::lround(cj - tm * dj)),
                  static_cast<int>(std::lround(ci + tp * di)), static_cast<int>(std::lround(cj + tp * dj)));
      }
      break;
    }
    case MaskKind::kCartesian: {
      if (!(params.density > 0.0 && params.density <= 1.0)) {
        throw PreconditionError("make_mask: cartesian density must lie in (0, 1]");
      }
      const double sigma = params.sigma_c > 0.0 ? params.sigma_c : std::max(1.0, w / 16.0);
      std::vector<double> profile(w);
      for (int j = 0; j < w; ++j) {
        const double k = std::abs(j - w / 2);
        profile[j] = 1.0 / ((1.0 + k / sigma) * (1.0 + k / sigma));
      }
      // Scale c so that sum_j min(1, c * profile_j) hits density * w.
      const double target = params.density * w;
      double lo = 0.0;
      double hi = 1.0;
      auto expected = [&](double c) {
        double s = 0.0;
        for (double p : profile) s += std::min(1.0, c * p);
        return s;
      };
      while (expected(hi) < target && hi < 1e12) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected(mid) < target ? lo : hi) = mid;
      }
      std::vector<std::uint8_t> columns(w, 0);
      std::vector<std::uint8_t> drawn(w, 0);
      for (int j = 0; j < w; ++j) {
        if (drawn[j]) continue;
        const int partner = to_centered((w - to_unshifted(j, w)) % w, w);
        const std::uint8_t keep = rng.uniform() < std::min(1.0, hi * profile[j]) ? 1 : 0;
        columns[j] = columns[partner] = keep;
        drawn[j] = drawn[partner] = 1;
      }
      columns[w / 2] = 1;
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          if (columns[j]) m.kept[static_cast<std::size_t>(i) * w + j] = 1;
      break;
    }
    case MaskKind::kCustom: throw PreconditionError("make_mask: custom masks are loaded from files");
  }
  hermitian_complete(m);
  return m;
}

std::vector<std::complex<double>> dft2(const Vec& s, int h, int w) {
  require_signal(Index{h} * w, s.size(), "dft2");
  Fft2 fft(h, w);
  std::vector<std::complex<double>> data(s.data(), s.data() + s.size());
  fft.forward(data);
  return data;
}

Vec idft2_real(const std::vector<std::complex<double>>& spectrum, int h, int w) {
  require_signal(Index{h} * w, static_cast<Index>(spectrum.size()), "idft2_real");
  Fft2 fft(h, w);
  auto data = spectrum;
  fft.backward(data);
  Vec out(static_cast<Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) out[static_cast<Index>(i)] = data[i].real();
  return out;
}

ForwardModel ForwardModel::identity(int h, int w) {
  if (h < 1 || w < 1) throw DimensionError("ForwardModel: shape must be positive");
  ForwardModel m;
  m.kind_ = ForwardKind::kIdentity;
  m.h_ = h;
  m.w_ = w;
  return m;
}

ForwardModel ForwardModel::masked_dft(SamplingMask mask) {
  if (mask.h < 1 || mask.w < 1 || mask.kept.size() != static_cast<std::size_t>(mask.h) * mask.w) {
    throw DimensionError("ForwardModel: malformed sampling mask");
  }
  ForwardModel m;
  m.kind_ = ForwardKind::kMaskedDft;
  m.h_ = mask.h;
  m.w_ = mask.w;
  const int h = mask.h;
  const int w = mask.w;
  Vec raw = Vec::Zero(Index{h} * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      const Index u = Index{to_unshifted(i, h)} * w + to_unshifted(j, w);
      m.kept_unshifted_.push_back(u);
      raw[u] = 1.0;
    }
  }
  // H^T H = F^* diag((M + flip M) / 2) F for real signals.
  m.gram_diag_ = Vec(Index{h} * w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v)
      m.gram_diag_[Index{u} * w + v] = 0.5 * (raw[Index{u} * w + v] + raw[Index{(h - u) % h} * w + (w - v) % w]);
  m.mask_ = std::move(mask);
  m.fft_ = std::make_shared<const Fft2>(h, w);
  return m;
}

ForwardModel ForwardModel::matrix(Mat H, int h, int w) {
  if (H.cols() != Index{h} * w) throw DimensionError("ForwardModel: matrix column count must equal h*w");
  ForwardModel m;
  m.kind_ = ForwardKind::kMatrix;
  m.h_ = h;
  m.w_ = w;
  m.H_ = std::move(H);
  return m;
}

std::string ForwardModel::kind_name() const {
  switch (kind_) {
    case ForwardKind::kIdentity: return "identity";
    case ForwardKind::kMaskedDft: return "masked_dft";
    case ForwardKind::kMatrix: return "matrix";
  }
  return "identity";
}

Index ForwardModel::measurement_size() const {
  switch (kind_) {
    case ForwardKind::kIdentity: return signal_size();
    case ForwardKind::kMaskedDft: return 2 * static_cast<Index>(kept_unshifted_.size());
    case ForwardKind::kMatrix: return H_.rows();
  }
  return 0;
}

bool ForwardModel::is_isometry() const {
  switch (kind_) {
    case ForwardKind::kIdentity: return true;
    case ForwardKind::kMaskedDft: return (gram_diag_.array() == 1.0).all();
    case ForwardKind::kMatrix: return false;
  }
  return false;
}

Vec ForwardModel::apply(const Vec& s) const {
  require_signal(signal_size(), s.size(), "ForwardModel::apply");
  switch (kind_) {
    case ForwardKind::kIdentity: return s;
    case ForwardKind::kMatrix: return H_ * s;
    case ForwardKind::kMaskedDft: {
      std::vector<std::complex<double>> data(s.data(), s.data() + s.size());
      fft_->forward(data);
      Vec y(measurement_size());
      for (std::size_t k = 0; k < kept_unshifted_.size(); ++k) {
        const auto& c = data[static_cast<std::size_t>(kept_unshifted_[k])];
        y[2 * static_cast<Index>(k)] = c.real();
        y[2 * static_cast<Index>(k) + 1] = c.imag();
      }
      return y;
    }
  }
  return s;
}

Vec ForwardModel::adjoint(const Vec& u) const {
  require_signal(measurement_size(), u.size(), "ForwardModel::adjoint");
  switch (kind_) {
    case ForwardKind::kIdentity: return u;
    case ForwardKind::kMatrix: return H_.transpose() * u;
    case ForwardKind::kMaskedDft: {
      std::vector<std::complex<double>> data(static_cast<std::size_t>(signal_size()));
      for (std::size_t k = 0; k < kept_unshifted_.size(); ++k) {
        data[static_cast<std::size_t>(kept_unshifted_[k])] = {u[2 * static_cast<Index>(k)],
                                                              u[2 * static_cast<Index>(k) + 1]};
      }
      fft_->backward(data);
      Vec s(signal_size());
      for (Index i = 0; i < s.size(); ++i) s[i] = data[static_cast<std::size_t>(i)].real();
      return s;
    }
  }
  return u;
}

Vec ForwardModel::solve_regularized(const Vec& rhs, double tau) const {
  require_signal(signal_size(), rhs.size(), "ForwardModel::solve_regularized");
  switch (kind_) {
    case ForwardKind::kIdentity: return rhs / (1.0 + tau);
    case ForwardKind::kMatrix: {
      Mat A = tau * (H_.transpose() * H_);
      A.diagonal().array() += 1.0;
      return A.llt().solve(rhs);
    }
    case ForwardKind::kMaskedDft: {
      std::vector<std::complex<double>> data(rhs.data(), rhs.data() + rhs.size());
      fft_->forward(data);
      for (std::size_t k = 0; k < data.size(); ++k) data[k] /= 1.0 + tau * gram_diag_[static_cast<Index>(k)];
      fft_->backward(data);
      Vec s(signal_size());
      for (Index i = 0; i < s.size(); ++i) s[i] = data[static_cast<std::size_t>(i)].real();
      return s;
    }
  }
  return rhs;
}

double psnr(const Image& reference, const Image& x, double peak) {
  require_same_shape(reference, x, "psnr");
  if (reference.size() == 0) throw DimensionError("psnr: empty images");
  const double mse = (reference.data - x.data).squaredNorm() / static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "piecewise_constant") return PhantomKind::kPiecewiseConstant;
  if (name == "shepp_like") return PhantomKind::kSheppLike;
  throw ParseError("unknown phantom '" + name + "' (expected piecewise_constant or shepp_like)");
}

Image make_phantom(PhantomKind kind, int h, int w, std::uint64_t seed) {
  if (h < 16 || w < 16) throw PreconditionError("make_phantom: h and w must be at least 16");
  Image img(h, w, 0.0);
  if (kind == PhantomKind::kPiecewiseConstant) {
    SplitMix64 rng(seed);
    const double background = 0.2 * rng.uniform();
    img.data.setConstant(background);
    const int n_rects = 8;
    for (int r = 0; r < n_rects; ++r) {
      const int rh = 4 + static_cast<int>(rng.uniform() * (h / 2 - 4));
      const int rw = 4 + static_cast<int>(rng.uniform() * (w / 2 - 4));
      const int i0 = static_cast<int>(rng.uniform() * (h - rh));
      const int j0 = static_cast<int>(rng.uniform() * (w - rw));
      const double value = rng.uniform();
      for (int i = i0; i < i0 + rh; ++i)
        for (int j = j0; j < j0 + rw; ++j) img(i, j) = value;
    }
    return img;
  }

  // Modified Shepp-Logan head: intensity, semi-axes a, b, center (x0, y0),
  // rotation in degrees, on [-1, 1]^2 with y pointing up.
  struct Ellipse {
    double value, a, b, x0, y0, phi;
  };
  static constexpr Ellipse kEllipses[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},        {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},       {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},     {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},   {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  for (int i = 0; i < h; ++i) {
    const double y = 1.0 - (2.0 * i + 1.0) / h;
    for (int j = 0; j < w; ++j) {
      const double x = (2.0 * j + 1.0) / w - 1.0;
      double v = 0.0;
      for (const Ellipse& e : kEllipses) {
        const double phi = e.phi * std::numbers::pi / 180.0;
        const double dx = x - e.x0;
        const double dy = y - e.y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

Image add_noise(const Image& s, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw PreconditionError("add_noise: sigma must be nonnegative");
  Image out = s;
  if (sigma == 0.0) return out;
  SplitMix64 rng(seed);
  for (Index i = 0; i < out.size(); ++i) out.data[i] += sigma * rng.normal();
  return out;
}

Image tv_reconstruct(const ForwardModel& model, const Vec& y, double lambda, double tol, int max_iter) {
  if (lambda < 0.0) throw PreconditionError("tv: lambda must be nonnegative");
  const LinearMap grad = circular_gradient(model.h(), model.w());
  PdhgOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  const PdhgResult res = pdhg_solve(model, grad, y, lambda, RegularizerNorm::kL1, options);
  return Image(model.h(), model.w(), res.signal);
}

Image tv_denoise(const Image& y, double lambda, double tol, int max_iter) {
  return tv_reconstruct(ForwardModel::identity(y.h, y.w), y.data, lambda, tol, max_iter);
}

}  // namespace polyreg
