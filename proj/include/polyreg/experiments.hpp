#pragma once

#include <functional>
#include <vector>

#include "polyreg/image.hpp"
#include "polyreg/io.hpp"
#include "polyreg/solvers.hpp"

namespace polyreg {

/// logspace(lo, hi, n): n values 10^lo ... 10^hi.
std::vector<double> logspace(double lo, double hi, int n);
/// The default tuning grid logspace(-3, 0, 20).
std::vector<double> default_lambda_grid();

/// Channel weights (0, 1, ..., 1): the first (low-pass) channel is left
/// unpenalized, every detail channel gets unit weight.
Vec detail_weights(int channels);

/// Runs the solver named in `config` ("drs", "apgd", "fista", "pdhg").
SolveResult run_solver(const Problem& problem, const io::SolverConfig& config);

struct TunePoint {
  double lambda = 0.0;
  double psnr = 0.0;
};

struct TuneResult {
  double lambda = 0.0;
  double psnr = 0.0;
  Image image;
  SolveReport report;
  std::vector<TunePoint> curve;
};

using LambdaSolver = std::function<SolveResult(double lambda)>;

/// Evaluates `solve` on every grid value and keeps the best PSNR against
/// `truth`. Ties keep the smaller lambda.
TuneResult tune_lambda(const std::vector<double>& grid, const LambdaSolver& solve, const Image& truth);

}  // namespace polyreg
