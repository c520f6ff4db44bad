#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polyreg/frame.hpp"
#include "polyreg/image.hpp"
#include "polyreg/models.hpp"
#include "polyreg/potential.hpp"
#include "polyreg/types.hpp"

namespace polyreg {

// Inverse problem  min_s 1/2 ||y - H s||^2 + lambda_global * Phi(T^T s),
// handled in the coefficient domain z = T^T s of the Parseval frame T.
struct Problem {
  ForwardModel model;
  Vec y;
  TightFrame frame;
  SeparablePotential potential;
  double lambda_global = 1.0;

  /// Throws DimensionError when H, y, the frame and the potential disagree.
  void validate() const;
};

struct SolveReport {
  std::string algorithm;
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  // Relative iterate change ||z^{n+1} - z^n|| / ||z^n|| per iteration.
  std::vector<double> residual_history;
  // Objective after every iteration; recorded by apgd_solve only.
  std::vector<double> objective_history;
  // check_optimality at the returned point; NaN when not computed.
  double optimality_residual = 0.0;
  // Duality gap for the solvers that certify one; NaN otherwise.
  double duality_gap = 0.0;
  double tau = 0.0;
  double rho = 0.0;
};

struct SolveResult {
  Image image;
  Vec coefficients;
  SolveReport report;
};

// Real linear map given by matched forward/adjoint callbacks.
struct LinearMap {
  Index in_size = 0;
  Index out_size = 0;
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> adjoint;
};

/// Largest eigenvalue of A^T A by power iteration, stopped when the relative
/// eigenvalue change is below `tol` (at most `max_iter` steps).
double power_iteration(const LinearMap& op, std::uint64_t seed = 0, double tol = 1e-8, int max_iter = 500);

/// rho = ||T^T H^T H T||, the step-size bound of the splitting solvers.
double operator_norm(const ForwardModel& model, const TightFrame& frame, std::uint64_t seed = 0);

/// Composite objective at the image s.
double objective(const Problem& problem, const Vec& s);

struct DrsOptions {
  double tau = 1.0;
  double tol = 1e-5;
  int max_iter = 5000;
  bool compute_optimality = true;
};

/// Douglas-Rachford splitting on the coefficient domain: a forward step on
/// the data term followed by the prox of the potential, then a reflection
/// through the range projection T^T T. Returns T applied to the last prox
/// point.
SolveResult drs_solve(const Problem& problem, const DrsOptions& options = {});

struct ApgdOptions {
  double tau = 1.0;
  double tol = 1e-5;
  int max_iter = 5000;
  bool momentum = false;
};

/// Gradient step on data term plus potential, followed by the range
/// projection. With `momentum`, the gradient is taken at a Nesterov
/// extrapolation point and momentum restarts whenever the objective rises.
SolveResult apgd_solve(const Problem& problem, const ApgdOptions& options = {});

struct FistaOptions {
  double tol = 1e-6;  // duality-gap threshold, relative to max(1, objective)
  int max_iter = 20000;
};

struct SynthesisSolution {
  Vec codes;
  Vec signal;
  SolveReport report;
};

/// Lasso  min_z 1/2 ||y - H G z||^2 + lambda ||z||_1  by FISTA with step
/// 1 / ||(HG)^T HG||, objective restart and a duality-gap stopping rule.
SynthesisSolution fista_synthesis(const Mat& H, const Mat& G, const Vec& y, double lambda,
                                  const FistaOptions& options = {});

/// Denoising problems (H = I) with a weighted-l1 potential: FISTA on the
/// synthesis form of the dual,
///   min_{||w||_inf <= 1} 1/2 ||y - T Lambda w||^2,
/// where T Lambda w ranges over the zonotope generated by the weighted frame
/// atoms. The image is s = y - T Lambda w, and the gap to the primal
/// objective certifies the result.
SolveResult fista_zonotope_synthesis(const Problem& problem, const FistaOptions& options = {});

enum class RegularizerNorm { kL1, kLinf };

struct PdhgOptions {
  double tol = 1e-5;
  int max_iter = 5000;
  // Use the strongly convex (O(1/k^2)) step schedule when H^T H = I.
  bool accelerate = true;
};

struct PdhgResult {
  Vec signal;
  Vec dual;
  SolveReport report;
};

/// Primal-dual hybrid gradient for  min_s 1/2 ||y - H s||^2 + lambda R(K s)
/// with R = ||.||_1 or ||.||_inf. The dual step projects onto the
/// lambda-scaled unit ball of the dual norm.
PdhgResult pdhg_solve(const ForwardModel& model, const LinearMap& K, const Vec& y, double lambda,
                      RegularizerNorm norm, const PdhgOptions& options = {});

/// min_s 1/2 ||y - H s||^2 + lambda ||F^T s||_inf for a dense facet matrix F.
PdhgResult pdhg_linf(const ForwardModel& model, const Mat& F, const Vec& y, double lambda,
                     const PdhgOptions& options = {});

/// Weighted-l1 problem min_s 1/2 ||y - H s||^2 + ||Lambda T^T s||_1 through
/// pdhg_solve with K = Lambda T^T stacked as analysis operator.
PdhgResult pdhg_weighted_l1(const Problem& problem, const PdhgOptions& options = {});

/// Circular forward differences (horizontal stacked over vertical).
LinearMap circular_gradient(int h, int w);

/// Frame analysis operator scaled channel-wise by lambda_global * lambda_c.
LinearMap weighted_analysis_operator(const Problem& problem);

/// Norm of the minimal-norm element of  H^T (H s - y) + L^T d(||.||_1)(L s),
/// L = lambda_global Lambda T^T. Entries of L s with magnitude at most
/// zero_tol * max(1, ||L s||_inf) are treated as zeros (full interval
/// [-1, 1]). Only defined for weighted-l1 potentials.
double check_optimality(const Problem& problem, const Vec& s, double zero_tol = 1e-6);

}  // namespace polyreg
