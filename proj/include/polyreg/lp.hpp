#pragma once

#include "polyreg/types.hpp"

namespace polyreg::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  long max_pivots = 1'000'000;
};

struct Result {
  Status status = Status::kInfeasible;
  Vec x;
  double objective = 0.0;
  // Optimal phase-one value: sum of artificial variables, i.e. the l1 norm
  // of the smallest constraint residual reachable with x >= 0.
  double infeasibility = 0.0;
  long pivots = 0;
};

/// Solves  min c^T x  s.t.  A x = b, x >= 0  with a dense two-phase
/// tableau simplex. Pivoting follows Bland's smallest-index rule, so the
/// method cannot cycle on degenerate vertices.
Result solve_standard_form(const Mat& A, const Vec& b, const Vec& c, const Options& options = {});

/// Phase one only: returns the minimal l1 residual of A x = b over x >= 0.
Result find_feasible(const Mat& A, const Vec& b, const Options& options = {});

}  // namespace polyreg::lp
