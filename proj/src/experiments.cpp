#include "polyreg/experiments.hpp"

#include <cmath>
#include <limits>

#include "polyreg/error.hpp"
#include "polyreg/models.hpp"

namespace polyreg {

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    const double e = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

std::vector<double> default_lambda_grid() { return logspace(-3.0, 0.0, 20); }

Vec detail_weights(int channels) {
  Vec w = Vec::Ones(channels);
  if (channels > 1) w[0] = 0.0;
  return w;
}

SolveResult run_solver(const Problem& problem, const io::SolverConfig& config) {
  const std::string& a = config.algorithm;
  if (a == "drs") {
    DrsOptions o;
    o.tau = config.tau;
    o.tol = config.tol;
    o.max_iter = config.max_iter;
    return drs_solve(problem, o);
  }
  if (a == "apgd") {
    ApgdOptions o;
    o.tau = config.tau;
    o.tol = config.tol;
    o.max_iter = config.max_iter;
    o.momentum = config.momentum;
    return apgd_solve(problem, o);
  }
  if (a == "fista") {
    FistaOptions o;
    o.tol = config.tol;
    o.max_iter = config.max_iter;
    return fista_zonotope_synthesis(problem, o);
  }
  if (a == "pdhg") {
    PdhgOptions o;
    o.tol = config.tol;
    o.max_iter = config.max_iter;
    PdhgResult r = pdhg_weighted_l1(problem, o);
    SolveResult out;
    out.image = Image(problem.frame.h(), problem.frame.w(), r.signal);
    out.coefficients = problem.frame.analyze(r.signal);
    out.report = std::move(r.report);
    return out;
  }
  throw ParseError("unknown algorithm '" + a + "' (expected drs, apgd, fista or pdhg)");
}

TuneResult tune_lambda(const std::vector<double>& grid, const LambdaSolver& solve, const Image& truth) {
  if (grid.empty()) throw PreconditionError("tune_lambda: empty grid");
  TuneResult best;
  best.psnr = -std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    SolveResult r = solve(lambda);
    const double q = psnr(truth, r.image);
    best.curve.push_back({lambda, q});
    if (q > best.psnr) {
      best.psnr = q;
      best.lambda = lambda;
      best.image = std::move(r.image);
      best.report = std::move(r.report);
    }
  }
  return best;
}

}  // namespace polyreg
