#include "polyreg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyreg/error.hpp"
#include "polyreg/prox.hpp"

namespace polyreg {
namespace {

constexpr double kSlopeTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise-linear interpolation with linear extrapolation by the end slopes.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double left_slope,
                   double right_slope, double t) {
  const std::size_t n = xs.size();
  if (t <= xs.front()) return ys.front() + left_slope * (t - xs.front());
  if (t >= xs.back()) return ys.back() + right_slope * (t - xs.back());
  const auto it = std::upper_bound(xs.begin(), xs.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
  const std::size_t k1 = std::min(k + 1, n - 1);
  const double dx = xs[k1] - xs[k];
  if (dx <= 0.0) return ys[k];
  const double a = (t - xs[k]) / dx;
  return ys[k] + a * (ys[k1] - ys[k]);
}

double segment_slope(const KnotTable& t, std::size_t k) { return (t.y[k + 1] - t.y[k]) / (t.x[k + 1] - t.x[k]); }

void validate_table(const KnotTable& t, std::size_t c) {
  const std::string where = "tabulated potential, channel " + std::to_string(c) + ": ";
  if (t.x.size() != t.y.size() || t.x.size() < 2) throw PreconditionError(where + "need at least two (x, y) knots");
  for (std::size_t k = 0; k + 1 < t.x.size(); ++k) {
    if (!(t.x[k + 1] > t.x[k])) throw PreconditionError(where + "input knots must be strictly increasing");
    const double s = segment_slope(t, k);
    if (s < -kSlopeTol || s > 1.0 + kSlopeTol) {
      throw PreconditionError(where + "slopes must lie in [0, 1] (monotone and 1-Lipschitz prox)");
    }
  }
  const double at_zero =
      interpolate(t.x, t.y, segment_slope(t, 0), segment_slope(t, t.x.size() - 2), 0.0);
  if (std::abs(at_zero) > 1e-12) throw PreconditionError(where + "prox(0) must be 0");
}

double clamp_slope(double s) { return std::clamp(s, 0.0, 1.0); }

// Integral of g(u) = a + b u over [lo, hi].
double integrate_linear(double a, double b, double lo, double hi) {
  return a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo);
}

// Integral over [0, t] of p^{-1}(u) - u for a monotone piecewise-linear prox p.
double integrate_inverse(const KnotTable& table, double t) {
  const std::size_t n = table.x.size();
  const double left = clamp_slope(segment_slope(table, 0));
  const double right = clamp_slope(segment_slope(table, n - 2));
  const double lo = std::min(0.0, t);
  const double hi = std::max(0.0, t);
  double total = 0.0;
  auto add_piece = [&](double from, double to, double y0, double x0, double slope_inv) {
    // On [from, to]: p^{-1}(u) = x0 + slope_inv (u - y0).
    const double a = std::max(lo, from);
    const double b = std::min(hi, to);
    if (b <= a) return;
    total += integrate_linear(x0 - slope_inv * y0, slope_inv - 1.0, a, b);
  };
  if (lo < table.y.front()) {
    if (left <= 0.0) return kInf;
    add_piece(-kInf, table.y.front(), table.y.front(), table.x.front(), 1.0 / left);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dy = table.y[k + 1] - table.y[k];
    if (dy <= 0.0) continue;
    add_piece(table.y[k], table.y[k + 1], table.y[k], table.x[k], (table.x[k + 1] - table.x[k]) / dy);
  }
  if (hi > table.y.back()) {
    if (right <= 0.0) return kInf;
    add_piece(table.y.back(), kInf, table.y.back(), table.x.back(), 1.0 / right);
  }
  return t >= 0.0 ? total : -total;
}

}  // namespace

SeparablePotential SeparablePotential::weighted_l1(Vec lambda) {
  if ((lambda.array() < 0.0).any()) throw PreconditionError("weighted_l1: channel weights must be nonnegative");
  SeparablePotential p;
  p.kind_ = PotentialKind::kWeightedL1;
  p.lambda_ = std::move(lambda);
  return p;
}

SeparablePotential SeparablePotential::huber(Vec lambda, double mu) {
  if ((lambda.array() < 0.0).any()) throw PreconditionError("huber: channel weights must be nonnegative");
  if (!(mu > 0.0)) throw PreconditionError("huber: smoothing width mu must be positive");
  SeparablePotential p;
  p.kind_ = PotentialKind::kHuber;
  p.lambda_ = std::move(lambda);
  p.mu_ = mu;
  return p;
}

SeparablePotential SeparablePotential::tabulated(std::vector<KnotTable> tables, Vec lambda) {
  if (tables.empty()) throw PreconditionError("tabulated: at least one channel table is required");
  for (std::size_t c = 0; c < tables.size(); ++c) validate_table(tables[c], c);
  if (lambda.size() == 0) lambda = Vec::Ones(static_cast<Index>(tables.size()));
  if (lambda.size() != static_cast<Index>(tables.size())) {
    throw DimensionError("tabulated: lambda length differs from the number of channel tables");
  }
  if ((lambda.array() < 0.0).any()) throw PreconditionError("tabulated: channel weights must be nonnegative");
  SeparablePotential p;
  p.kind_ = PotentialKind::kTabulated;
  p.lambda_ = std::move(lambda);
  p.tables_ = std::move(tables);
  return p;
}

std::string SeparablePotential::kind_name() const {
  switch (kind_) {
    case PotentialKind::kWeightedL1: return "weighted_l1";
    case PotentialKind::kHuber: return "huber";
    case PotentialKind::kTabulated: return "tabulated";
  }
  return "unknown";
}

bool SeparablePotential::differentiable() const {
  switch (kind_) {
    case PotentialKind::kWeightedL1: return false;
    case PotentialKind::kHuber: return true;
    case PotentialKind::kTabulated:
      for (const KnotTable& t : tables_)
        for (std::size_t k = 0; k + 1 < t.x.size(); ++k)
          if (segment_slope(t, k) <= kSlopeTol) return false;
      return true;
  }
  return false;
}

double SeparablePotential::prox_scalar(int c, double t, double tau) const {
  const double alpha = tau * lambda_[c];
  switch (kind_) {
    case PotentialKind::kWeightedL1: {
      const double a = std::abs(t) - alpha;
      return a > 0.0 ? std::copysign(a, t) : 0.0;
    }
    case PotentialKind::kHuber: return huber_prox(t, alpha, mu_);
    case PotentialKind::kTabulated: {
      if (alpha == 0.0) return t;
      // The graph of prox_{alpha phi} passes through ((1 - alpha) y_k + alpha x_k, y_k).
      const KnotTable& tab = tables_[c];
      const std::size_t n = tab.x.size();
      std::vector<double> xs(n);
      for (std::size_t k = 0; k < n; ++k) xs[k] = (1.0 - alpha) * tab.y[k] + alpha * tab.x[k];
      auto scaled = [&](double s) {
        s = clamp_slope(s);
        const double den = (1.0 - alpha) * s + alpha;
        return den > 0.0 ? s / den : 0.0;
      };
      return interpolate(xs, tab.y, scaled(segment_slope(tab, 0)), scaled(segment_slope(tab, n - 2)), t);
    }
  }
  return t;
}

double SeparablePotential::grad_scalar(int c, double t) const {
  switch (kind_) {
    case PotentialKind::kWeightedL1:
      throw UnsupportedError("potential gradient: weighted_l1 is not differentiable at 0, use a prox-based solver");
    case PotentialKind::kHuber: return lambda_[c] * huber_derivative(t, mu_);
    case PotentialKind::kTabulated: {
      const KnotTable& tab = tables_[c];
      const std::size_t n = tab.x.size();
      for (std::size_t k = 0; k + 1 < n; ++k) {
        if (segment_slope(tab, k) <= kSlopeTol) {
          throw UnsupportedError("potential gradient: tabulated prox has a flat segment (non-differentiable potential)");
        }
      }
      const double inv = interpolate(tab.y, tab.x, 1.0 / clamp_slope(segment_slope(tab, 0)),
                                     1.0 / clamp_slope(segment_slope(tab, n - 2)), t);
      return lambda_[c] * (inv - t);
    }
  }
  return 0.0;
}

double SeparablePotential::value_scalar(int c, double t) const {
  switch (kind_) {
    case PotentialKind::kWeightedL1: return lambda_[c] * std::abs(t);
    case PotentialKind::kHuber: return lambda_[c] * huber_value(t, mu_);
    case PotentialKind::kTabulated: {
      if (lambda_[c] == 0.0) return 0.0;
      return lambda_[c] * integrate_inverse(tables_[c], t);
    }
  }
  return 0.0;
}

void SeparablePotential::check_stack(const Vec& z, Index pixels) const {
  if (pixels <= 0 || z.size() != pixels * channels()) {
    throw DimensionError("potential: stack has " + std::to_string(z.size()) + " coefficients, expected " +
                         std::to_string(channels()) + " channels x " + std::to_string(pixels) + " pixels");
  }
}

Vec SeparablePotential::prox(const Vec& z, Index pixels, double tau) const {
  check_stack(z, pixels);
  Vec out(z.size());
  for (int c = 0; c < channels(); ++c) {
    const Index off = c * pixels;
    if (kind_ == PotentialKind::kWeightedL1) {
      const double alpha = tau * lambda_[c];
      for (Index p = 0; p < pixels; ++p) {
        const double v = z[off + p];
        const double a = std::abs(v) - alpha;
        out[off + p] = a > 0.0 ? std::copysign(a, v) : 0.0;
      }
    } else {
      for (Index p = 0; p < pixels; ++p) out[off + p] = prox_scalar(c, z[off + p], tau);
    }
  }
  return out;
}

Vec SeparablePotential::grad(const Vec& z, Index pixels) const {
  check_stack(z, pixels);
  if (!differentiable()) {
    throw UnsupportedError("potential gradient: '" + kind_name() + "' potential is not differentiable");
  }
  Vec out(z.size());
  for (int c = 0; c < channels(); ++c)
    for (Index p = 0; p < pixels; ++p) out[c * pixels + p] = grad_scalar(c, z[c * pixels + p]);
  return out;
}

double SeparablePotential::value(const Vec& z, Index pixels) const {
  check_stack(z, pixels);
  double total = 0.0;
  for (int c = 0; c < channels(); ++c) {
    if (kind_ == PotentialKind::kWeightedL1) {
      total += lambda_[c] * z.segment(c * pixels, pixels).lpNorm<1>();
    } else {
      for (Index p = 0; p < pixels; ++p) total += value_scalar(c, z[c * pixels + p]);
    }
  }
  return total;
}

double SeparablePotential::grad_lipschitz() const {
  if (!differentiable()) return kInf;
  double lip = 0.0;
  for (int c = 0; c < channels(); ++c) {
    if (kind_ == PotentialKind::kHuber) {
      lip = std::max(lip, lambda_[c] / mu_);
    } else {
      const KnotTable& t = tables_[c];
      for (std::size_t k = 0; k + 1 < t.x.size(); ++k)
        lip = std::max(lip, lambda_[c] * (1.0 / clamp_slope(segment_slope(t, k)) - 1.0));
    }
  }
  return lip;
}

}  // namespace polyreg
