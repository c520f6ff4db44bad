#pragma once

#include <string>
#include <vector>

#include "polyreg/types.hpp"

namespace polyreg {

// Monotone piecewise-linear map given by strictly increasing input knots and
// nondecreasing outputs with slopes in [0, 1]. Linear extrapolation past
// either end uses the slope of the nearest segment.
struct KnotTable {
  std::vector<double> x;
  std::vector<double> y;
};

enum class PotentialKind { kWeightedL1, kHuber, kTabulated };

/// Separable potential Phi(z) = sum_n phi_c(n)(z_n) over a channel stack,
/// with one scalar weight lambda_c per channel.
///
///  - weighted_l1: phi_c(t) = lambda_c |t|
///  - huber:       phi_c(t) = lambda_c huber_mu(t)
///  - tabulated:   phi_c is defined through its proximal map. The table of
///                 channel c stores prox_{phi_c} at unit weight; prox of
///                 alpha * phi_c is derived in closed form from it.
class SeparablePotential {
 public:
  static SeparablePotential weighted_l1(Vec lambda);
  static SeparablePotential huber(Vec lambda, double mu = 1e-2);
  /// Validates every table: strictly increasing x, slopes in [0, 1],
  /// prox(0) = 0. Throws PreconditionError otherwise.
  static SeparablePotential tabulated(std::vector<KnotTable> tables, Vec lambda = Vec());

  PotentialKind kind() const { return kind_; }
  std::string kind_name() const;
  int channels() const { return static_cast<int>(lambda_.size()); }
  const Vec& lambda() const { return lambda_; }
  double mu() const { return mu_; }
  const std::vector<KnotTable>& tables() const { return tables_; }

  /// True when Phi has a gradient everywhere (huber, or tabulated with all
  /// slopes strictly positive).
  bool differentiable() const;

  /// prox of tau * Phi applied to a channel-major stack with `pixels`
  /// coefficients per channel.
  Vec prox(const Vec& z, Index pixels, double tau) const;
  /// Channel-wise derivative of Phi. Throws UnsupportedError when Phi is not
  /// differentiable.
  Vec grad(const Vec& z, Index pixels) const;
  /// Phi(z) = sum of the component potentials (may be +inf for tabulated
  /// maps whose range is bounded).
  double value(const Vec& z, Index pixels) const;
  /// Lipschitz constant of grad (max over channels), +inf if not differentiable.
  double grad_lipschitz() const;

  /// Scalar maps for channel c, exposed for testing.
  double prox_scalar(int c, double t, double tau) const;
  double grad_scalar(int c, double t) const;
  double value_scalar(int c, double t) const;

 private:
  void check_stack(const Vec& z, Index pixels) const;

  PotentialKind kind_ = PotentialKind::kWeightedL1;
  Vec lambda_;
  double mu_ = 1e-2;
  std::vector<KnotTable> tables_;
};

}  // namespace polyreg
