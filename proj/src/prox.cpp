#include "polyreg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "polyreg/error.hpp"

namespace polyreg {

Vec soft_threshold(const Vec& z, const Vec& thresholds, double tau) {
  if (thresholds.size() != z.size()) throw DimensionError("soft_threshold: thresholds length differs from z");
  if (tau < 0.0) throw PreconditionError("soft_threshold: tau must be nonnegative");
  if ((thresholds.array() < 0.0).any()) throw PreconditionError("soft_threshold: negative threshold");
  Vec out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double t = tau * thresholds[i];
    const double a = std::abs(z[i]) - t;
    out[i] = a > 0.0 ? std::copysign(a, z[i]) : 0.0;
  }
  return out;
}

Vec soft_threshold(const Vec& z, double threshold, double tau) {
  return soft_threshold(z, Vec::Constant(z.size(), threshold), tau);
}

Vec project_l1_ball(const Vec& z, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("project_l1_ball: radius must be positive");
  if (z.lpNorm<1>() <= radius) return z;
  std::vector<double> mags(z.size());
  for (Index i = 0; i < z.size(); ++i) mags[i] = std::abs(z[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double shrink = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double mu = (cumulative - radius) / static_cast<double>(k + 1);
    if (mu < mags[k]) shrink = mu;
  }
  Vec out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - shrink;
    out[i] = a > 0.0 ? std::copysign(a, z[i]) : 0.0;
  }
  return out;
}

Vec prox_linf(const Vec& z, double tau_lambda) {
  if (tau_lambda < 0.0) throw PreconditionError("prox_linf: tau_lambda must be nonnegative");
  if (tau_lambda == 0.0) return z;
  if (z.lpNorm<1>() <= tau_lambda) return Vec::Zero(z.size());
  return z - project_l1_ball(z, tau_lambda);
}

Vec project_linf_ball(const Vec& z, double radius) {
  if (radius < 0.0) throw PreconditionError("project_linf_ball: radius must be nonnegative");
  return z.cwiseMax(-radius).cwiseMin(radius);
}

double huber_prox(double z, double scale, double mu) {
  if (std::abs(z) <= mu + scale) return z * mu / (mu + scale);
  return z - std::copysign(scale, z);
}

double huber_value(double z, double mu) {
  const double a = std::abs(z);
  return a <= mu ? 0.5 * z * z / mu : a - 0.5 * mu;
}

double huber_derivative(double z, double mu) { return std::clamp(z / mu, -1.0, 1.0); }

}  // namespace polyreg
