#pragma once

#include "polyreg/types.hpp"

namespace polyreg {

/// sign(z_n) * max(|z_n| - tau * thresholds_n, 0).
Vec soft_threshold(const Vec& z, const Vec& thresholds, double tau);
Vec soft_threshold(const Vec& z, double threshold, double tau = 1.0);

/// Euclidean projection onto {u : ||u||_1 <= radius} by sort-and-threshold.
Vec project_l1_ball(const Vec& z, double radius);

/// Proximal map of tau_lambda * ||.||_inf, through the Moreau identity
/// prox(z) = z - P_{l1 ball of radius tau_lambda}(z).
Vec prox_linf(const Vec& z, double tau_lambda);

/// Component-wise clamp to [-radius, radius] (projection onto the l_inf ball).
Vec project_linf_ball(const Vec& z, double radius);

/// Closed-form proximal map of  scale * huber_mu  applied component-wise,
/// where huber_mu(t) = t^2 / (2 mu) for |t| <= mu and |t| - mu / 2 beyond.
double huber_prox(double z, double scale, double mu);
double huber_value(double z, double mu);
double huber_derivative(double z, double mu);

}  // namespace polyreg
