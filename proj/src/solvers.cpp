#include "polyreg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polyreg/error.hpp"
#include "polyreg/prox.hpp"
#include "polyreg/random.hpp"

namespace polyreg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTiny = 1e-300;

void check_finite(const Vec& v, const char* algorithm, double tau, double rho) {
  if (!v.allFinite()) {
    throw DivergenceError(std::string(algorithm) + ": non-finite iterate (tau = " + std::to_string(tau) +
                          "); choose tau < 2 / rho with rho = " + std::to_string(rho));
  }
}

double relative_change(const Vec& next, const Vec& prev) {
  const double denom = prev.norm();
  const double diff = (next - prev).norm();
  if (denom <= kTiny) return diff <= kTiny ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / denom;
}

// Per-coefficient weights lambda_global * lambda_c.
Vec coefficient_weights(const Problem& problem) {
  const Index P = problem.frame.pixel_count();
  const Vec& lambda = problem.potential.lambda();
  Vec weights(problem.frame.coefficient_count());
  for (int c = 0; c < problem.frame.channels(); ++c)
    weights.segment(c * P, P).setConstant(problem.lambda_global * lambda[c]);
  return weights;
}

// Gradient of 1/2 ||y - H T z||^2 in the coefficient domain.
Vec data_gradient(const Problem& problem, const Vec& z) {
  const Vec residual = problem.model.apply(problem.frame.synthesize(z)) - problem.y;
  return problem.frame.analyze(problem.model.adjoint(residual));
}

double effective_step(double tau, double lipschitz) {
  if (!(tau > 0.0)) throw PreconditionError("step size tau must be positive");
  if (lipschitz > 0.0 && tau * lipschitz > 1.9) return 1.9 / lipschitz;
  return tau;
}

void require_weighted_l1(const Problem& problem, const char* what) {
  if (problem.potential.kind() != PotentialKind::kWeightedL1) {
    throw UnsupportedError(std::string(what) + ": requires a weighted_l1 potential (got '" +
                           problem.potential.kind_name() + "')");
  }
}

}  // namespace

void Problem::validate() const {
  if (model.h() != frame.h() || model.w() != frame.w()) {
    throw DimensionError("Problem: forward model and frame are defined on different image shapes");
  }
  if (y.size() != model.measurement_size()) {
    throw DimensionError("Problem: measurement vector has " + std::to_string(y.size()) + " entries, H produces " +
                         std::to_string(model.measurement_size()));
  }
  if (potential.channels() != frame.channels()) {
    throw DimensionError("Problem: potential has " + std::to_string(potential.channels()) +
                         " channel weights, frame has " + std::to_string(frame.channels()) + " channels");
  }
  if (lambda_global < 0.0) throw PreconditionError("Problem: lambda_global must be nonnegative");
}

double power_iteration(const LinearMap& op, std::uint64_t seed, double tol, int max_iter) {
  if (op.in_size == 0) return 0.0;
  SplitMix64 rng(seed);
  Vec v = rng.normal_vector(op.in_size);
  v /= v.norm();
  double eig = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vec u = op.adjoint(op.apply(v));
    const double next = v.dot(u);
    const double nrm = u.norm();
    if (nrm <= kTiny) return 0.0;
    v = u / nrm;
    if (it > 0 && std::abs(next - eig) <= tol * std::abs(next)) return std::max(next, nrm);
    eig = next;
  }
  return eig;
}

double operator_norm(const ForwardModel& model, const TightFrame& frame, std::uint64_t seed) {
  LinearMap op;
  op.in_size = frame.coefficient_count();
  op.out_size = model.measurement_size();
  op.apply = [&](const Vec& z) { return model.apply(frame.synthesize(z)); };
  op.adjoint = [&](const Vec& u) { return frame.analyze(model.adjoint(u)); };
  return power_iteration(op, seed);
}

double objective(const Problem& problem, const Vec& s) {
  const Vec r = problem.y - problem.model.apply(s);
  const Vec z = problem.frame.analyze(s);
  double reg = 0.0;
  if (problem.lambda_global != 0.0) reg = problem.lambda_global * problem.potential.value(z, problem.frame.pixel_count());
  return 0.5 * r.squaredNorm() + reg;
}

SolveResult drs_solve(const Problem& problem, const DrsOptions& options) {
  problem.validate();
  const TightFrame& T = problem.frame;
  const Index P = T.pixel_count();
  SolveReport report;
  report.algorithm = "drs";
  report.rho = operator_norm(problem.model, T);
  report.tau = effective_step(options.tau, report.rho);
  const double tau = report.tau;

  Vec z = T.analyze(problem.model.adjoint(problem.y));
  Vec half = z;
  for (int n = 0; n < options.max_iter; ++n) {
    half = problem.potential.prox(z - tau * data_gradient(problem, z), P, tau * problem.lambda_global);
    Vec next = T.analyze(T.synthesize(2.0 * half - z)) + z - half;
    check_finite(next, "drs", tau, report.rho);
    const double change = relative_change(next, z);
    report.residual_history.push_back(change);
    report.iterations = n + 1;
    z = std::move(next);
    if (change <= options.tol) {
      report.converged = true;
      break;
    }
  }

  SolveResult result;
  result.image = Image(T.h(), T.w(), T.synthesize(half));
  result.coefficients = half;
  report.final_objective = objective(problem, result.image.data);
  report.duality_gap = kNaN;
  report.optimality_residual = kNaN;
  if (options.compute_optimality && problem.potential.kind() == PotentialKind::kWeightedL1) {
    report.optimality_residual = check_optimality(problem, result.image.data);
  }
  result.report = std::move(report);
  return result;
}

SolveResult apgd_solve(const Problem& problem, const ApgdOptions& options) {
  problem.validate();
  if (!problem.potential.differentiable()) {
    throw UnsupportedError("apgd: potential '" + problem.potential.kind_name() +
                           "' is not differentiable, use drs instead");
  }
  const TightFrame& T = problem.frame;
  const Index P = T.pixel_count();
  SolveReport report;
  report.algorithm = options.momentum ? "apgd+momentum" : "apgd";
  report.rho = operator_norm(problem.model, T);
  const double lipschitz = report.rho + problem.lambda_global * problem.potential.grad_lipschitz();
  report.tau = effective_step(options.tau, lipschitz);
  const double tau = report.tau;

  auto gradient = [&](const Vec& z) {
    Vec g = data_gradient(problem, z);
    if (problem.lambda_global != 0.0) g += problem.lambda_global * problem.potential.grad(z, P);
    return g;
  };
  auto step = [&](const Vec& z) { return Vec(T.analyze(T.synthesize(z - tau * gradient(z)))); };
  auto objective_of = [&](const Vec& z) { return objective(problem, T.synthesize(z)); };

  Vec z = T.analyze(problem.model.adjoint(problem.y));
  Vec previous = z;
  double t = 1.0;
  double current_obj = objective_of(z);
  for (int n = 0; n < options.max_iter; ++n) {
    Vec next;
    if (options.momentum) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const Vec v = z + ((t - 1.0) / t_next) * (z - previous);
      next = step(v);
      t = t_next;
      double next_obj = objective_of(next);
      if (next_obj > current_obj) {
        t = 1.0;
        next = step(z);
        next_obj = objective_of(next);
      }
      current_obj = next_obj;
    } else {
      next = step(z);
      current_obj = objective_of(next);
    }
    check_finite(next, "apgd", tau, report.rho);
    const double change = relative_change(next, z);
    report.residual_history.push_back(change);
    report.objective_history.push_back(current_obj);
    report.iterations = n + 1;
    previous = std::move(z);
    z = std::move(next);
    if (change <= options.tol) {
      report.converged = true;
      break;
    }
  }

  SolveResult result;
  result.image = Image(T.h(), T.w(), T.synthesize(z));
  result.coefficients = z;
  report.final_objective = objective(problem, result.image.data);
  report.duality_gap = kNaN;
  report.optimality_residual = kNaN;
  result.report = std::move(report);
  return result;
}

SynthesisSolution fista_synthesis(const Mat& H, const Mat& G, const Vec& y, double lambda,
                                  const FistaOptions& options) {
  if (lambda < 0.0) throw PreconditionError("fista_synthesis: lambda must be nonnegative");
  if (H.cols() != G.rows()) throw DimensionError("fista_synthesis: H columns must match G rows");
  if (H.rows() != y.size()) throw DimensionError("fista_synthesis: H rows must match the data length");
  const Mat A = H * G;
  LinearMap op;
  op.in_size = A.cols();
  op.out_size = A.rows();
  op.apply = [&](const Vec& z) { return Vec(A * z); };
  op.adjoint = [&](const Vec& r) { return Vec(A.transpose() * r); };
  const double L = power_iteration(op, 0, 1e-10, 2000);

  SolveReport report;
  report.algorithm = "fista";
  report.rho = L;
  report.tau = L > 0.0 ? 1.0 / L : 1.0;
  const double step = report.tau;

  auto primal = [&](const Vec& z) { return 0.5 * (y - A * z).squaredNorm() + lambda * z.lpNorm<1>(); };
  auto gap_of = [&](const Vec& z, double p) {
    const Vec r = y - A * z;
    const double corr = (A.transpose() * r).lpNorm<Eigen::Infinity>();
    const double scale = (lambda > 0.0 && corr > lambda) ? lambda / corr : (lambda > 0.0 ? 1.0 : 0.0);
    const Vec theta = scale * r;
    const double dual = 0.5 * y.squaredNorm() - 0.5 * (y - theta).squaredNorm();
    return std::max(0.0, p - dual);
  };

  Vec z = Vec::Zero(A.cols());
  Vec previous = z;
  double t = 1.0;
  double obj = primal(z);
  for (int n = 0; n < options.max_iter; ++n) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vec v = z + ((t - 1.0) / t_next) * (z - previous);
    Vec next = soft_threshold(Vec(v - step * (A.transpose() * (A * v - y))), lambda, step);
    double next_obj = primal(next);
    t = t_next;
    if (next_obj > obj) {
      t = 1.0;
      next = soft_threshold(Vec(z - step * (A.transpose() * (A * z - y))), lambda, step);
      next_obj = primal(next);
    }
    check_finite(next, "fista", step, L);
    const double change = relative_change(next, z);
    report.residual_history.push_back(change);
    report.iterations = n + 1;
    previous = std::move(z);
    z = std::move(next);
    obj = next_obj;
    report.duality_gap = gap_of(z, obj);
    if (report.duality_gap <= options.tol * std::max(1.0, std::abs(obj)) || change <= 1e-15) {
      report.converged = true;
      break;
    }
  }
  report.final_objective = obj;
  report.optimality_residual = kNaN;
  SynthesisSolution out;
  out.signal = G * z;
  out.codes = std::move(z);
  out.report = std::move(report);
  return out;
}

SolveResult fista_zonotope_synthesis(const Problem& problem, const FistaOptions& options) {
  problem.validate();
  require_weighted_l1(problem, "fista_zonotope_synthesis");
  if (problem.model.kind() != ForwardKind::kIdentity) {
    throw UnsupportedError("fista_zonotope_synthesis: only denoising problems (identity forward model) are supported");
  }
  const TightFrame& T = problem.frame;
  const Vec weights = coefficient_weights(problem);
  const Vec& y = problem.y;
  const double L = weights.squaredNorm() > 0.0 ? weights.cwiseAbs2().maxCoeff() : 0.0;

  SolveReport report;
  report.algorithm = "fista-zonotope";
  report.rho = L;
  report.tau = L > 0.0 ? 1.0 / L : 1.0;
  const double step = report.tau;

  auto image_of = [&](const Vec& w) { return Vec(y - T.synthesize(weights.cwiseProduct(w))); };
  auto dual_objective = [&](const Vec& w) { return 0.5 * image_of(w).squaredNorm(); };
  auto primal = [&](const Vec& s) {
    return 0.5 * (y - s).squaredNorm() + weights.cwiseProduct(T.analyze(s)).lpNorm<1>();
  };

  Vec w = Vec::Zero(T.coefficient_count());
  Vec previous = w;
  double t = 1.0;
  double dual_obj = dual_objective(w);
  Vec s = y;
  if (L == 0.0) {
    report.converged = true;
    report.duality_gap = 0.0;
  }
  for (int n = 0; L > 0.0 && n < options.max_iter; ++n) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vec v = w + ((t - 1.0) / t_next) * (w - previous);
    auto project_step = [&](const Vec& from) {
      const Vec grad = -weights.cwiseProduct(T.analyze(image_of(from)));
      return project_linf_ball(from - step * grad, 1.0);
    };
    Vec next = project_step(v);
    double next_obj = dual_objective(next);
    t = t_next;
    if (next_obj > dual_obj) {
      t = 1.0;
      next = project_step(w);
      next_obj = dual_objective(next);
    }
    check_finite(next, "fista-zonotope", step, L);
    const double change = relative_change(next, w);
    report.residual_history.push_back(change);
    report.iterations = n + 1;
    previous = std::move(w);
    w = std::move(next);
    dual_obj = next_obj;
    s = image_of(w);
    const double p = primal(s);
    // Fenchel dual value 1/2 ||y||^2 - 1/2 ||y - T Lambda w||^2.
    report.duality_gap = std::max(0.0, p - (0.5 * y.squaredNorm() - dual_obj));
    if (report.duality_gap <= options.tol * std::max(1.0, std::abs(p))) {
      report.converged = true;
      break;
    }
  }

  SolveResult result;
  result.image = Image(T.h(), T.w(), s);
  result.coefficients = w;
  report.final_objective = objective(problem, s);
  report.optimality_residual = kNaN;
  result.report = std::move(report);
  return result;
}

PdhgResult pdhg_solve(const ForwardModel& model, const LinearMap& K, const Vec& y, double lambda,
                      RegularizerNorm norm, const PdhgOptions& options) {
  if (lambda < 0.0) throw PreconditionError("pdhg: lambda must be nonnegative");
  if (K.in_size != model.signal_size()) throw DimensionError("pdhg: analysis operator input size differs from the signal size");
  if (y.size() != model.measurement_size()) throw DimensionError("pdhg: data length differs from the measurement size");

  const double K_norm = std::sqrt(std::max(0.0, power_iteration(K, 0, 1e-10, 1000)));
  SolveReport report;
  report.algorithm = "pdhg";
  report.rho = K_norm * K_norm;
  double tau = K_norm > 0.0 ? 0.99 / K_norm : 1.0;
  double sigma = tau;
  report.tau = tau;
  const bool strongly_convex = options.accelerate && model.is_isometry();

  auto project_dual = [&](const Vec& p) {
    if (lambda == 0.0) return Vec(Vec::Zero(p.size()));
    return norm == RegularizerNorm::kL1 ? project_linf_ball(p, lambda) : project_l1_ball(p, lambda);
  };
  auto reg_value = [&](const Vec& s) {
    const Vec ks = K.apply(s);
    return norm == RegularizerNorm::kL1 ? ks.lpNorm<1>() : ks.lpNorm<Eigen::Infinity>();
  };

  const Vec backprojection = model.adjoint(y);
  Vec s = backprojection;
  Vec s_bar = s;
  Vec p = Vec::Zero(K.out_size);
  for (int n = 0; n < options.max_iter; ++n) {
    p = project_dual(p + sigma * K.apply(s_bar));
    Vec next = model.solve_regularized(s - tau * K.adjoint(p) + tau * backprojection, tau);
    double theta = 1.0;
    if (strongly_convex) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * tau);
      tau *= theta;
      sigma /= theta;
    }
    s_bar = next + theta * (next - s);
    check_finite(next, "pdhg", tau, report.rho);
    const double change = relative_change(next, s);
    report.residual_history.push_back(change);
    report.iterations = n + 1;
    s = std::move(next);

    bool done = change <= options.tol;
    if (strongly_convex) {
      // With H^T H = I the dual point certifies a gap:
      //   P(s) - (1/2 ||y||^2 - 1/2 ||H^T y - K^T p||^2).
      const double primal = 0.5 * (y - model.apply(s)).squaredNorm() + lambda * reg_value(s);
      const double dual = 0.5 * y.squaredNorm() - 0.5 * (backprojection - K.adjoint(p)).squaredNorm();
      report.duality_gap = std::max(0.0, primal - dual);
      done = report.duality_gap <= options.tol * std::max(1.0, std::abs(primal));
    }
    if (done) {
      report.converged = true;
      break;
    }
  }
  if (!strongly_convex) report.duality_gap = kNaN;
  report.final_objective = 0.5 * (y - model.apply(s)).squaredNorm() + lambda * reg_value(s);
  report.optimality_residual = kNaN;
  return {std::move(s), std::move(p), std::move(report)};
}

PdhgResult pdhg_linf(const ForwardModel& model, const Mat& F, const Vec& y, double lambda,
                     const PdhgOptions& options) {
  if (F.rows() != model.signal_size()) throw DimensionError("pdhg_linf: facet matrix rows must equal the signal size");
  LinearMap K;
  K.in_size = F.rows();
  K.out_size = F.cols();
  K.apply = [&F](const Vec& s) { return Vec(F.transpose() * s); };
  K.adjoint = [&F](const Vec& p) { return Vec(F * p); };
  return pdhg_solve(model, K, y, lambda, RegularizerNorm::kLinf, options);
}

LinearMap weighted_analysis_operator(const Problem& problem) {
  const TightFrame& T = problem.frame;
  const Vec weights = coefficient_weights(problem);
  LinearMap K;
  K.in_size = T.pixel_count();
  K.out_size = T.coefficient_count();
  K.apply = [&T, weights](const Vec& s) { return Vec(weights.cwiseProduct(T.analyze(s))); };
  K.adjoint = [&T, weights](const Vec& p) { return T.synthesize(Vec(weights.cwiseProduct(p))); };
  return K;
}

PdhgResult pdhg_weighted_l1(const Problem& problem, const PdhgOptions& options) {
  problem.validate();
  require_weighted_l1(problem, "pdhg_weighted_l1");
  PdhgResult res = pdhg_solve(problem.model, weighted_analysis_operator(problem), problem.y, 1.0,
                              RegularizerNorm::kL1, options);
  res.report.final_objective = objective(problem, res.signal);
  return res;
}

LinearMap circular_gradient(int h, int w) {
  LinearMap D;
  const Index P = Index{h} * w;
  D.in_size = P;
  D.out_size = 2 * P;
  D.apply = [h, w, P](const Vec& s) {
    Vec g(2 * P);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const Index p = Index{i} * w + j;
        g[p] = s[Index{i} * w + (j + 1) % w] - s[p];
        g[P + p] = s[Index{(i + 1) % h} * w + j] - s[p];
      }
    }
    return g;
  };
  D.adjoint = [h, w, P](const Vec& g) {
    Vec s(P);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const Index p = Index{i} * w + j;
        s[p] = g[Index{i} * w + (j + w - 1) % w] - g[p] + g[P + Index{(i + h - 1) % h} * w + j] - g[P + p];
      }
    }
    return s;
  };
  return D;
}

double check_optimality(const Problem& problem, const Vec& s, double zero_tol) {
  problem.validate();
  require_weighted_l1(problem, "check_optimality");
  if (s.size() != problem.model.signal_size()) throw DimensionError("check_optimality: image size mismatch");
  const TightFrame& T = problem.frame;
  const Vec weights = coefficient_weights(problem);
  const Vec gradient = problem.model.adjoint(problem.model.apply(s) - problem.y);
  const Vec Ls = weights.cwiseProduct(T.analyze(s));
  const double threshold = zero_tol * std::max(1.0, Ls.lpNorm<Eigen::Infinity>());

  // Fixed subgradient entries on the support, free box entries elsewhere.
  Vec fixed = Vec::Zero(Ls.size());
  Vec free_weights = Vec::Zero(Ls.size());
  for (Index i = 0; i < Ls.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (std::abs(Ls[i]) > threshold) {
      fixed[i] = Ls[i] > 0.0 ? 1.0 : -1.0;
    } else {
      free_weights[i] = weights[i];
    }
  }
  const Vec base = gradient + T.synthesize(Vec(weights.cwiseProduct(fixed)));
  const double L = free_weights.cwiseAbs2().maxCoeff();
  if (L == 0.0) return base.norm();

  // min over ||w||_inf <= 1 of 1/2 ||base + T (free_weights .* w)||^2 (FISTA).
  auto residual = [&](const Vec& w) { return Vec(base + T.synthesize(Vec(free_weights.cwiseProduct(w)))); };
  Vec w = Vec::Zero(Ls.size());
  Vec previous = w;
  double t = 1.0;
  double best = base.norm();
  for (int it = 0; it < 5000; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vec v = w + ((t - 1.0) / t_next) * (w - previous);
    const Vec grad = free_weights.cwiseProduct(T.analyze(residual(v)));
    Vec next = project_linf_ball(v - grad / L, 1.0);
    t = t_next;
    const double value = residual(next).norm();
    if (value > best) {
      t = 1.0;
      next = project_linf_ball(w - free_weights.cwiseProduct(T.analyze(residual(w))) / L, 1.0);
    }
    const double change = (next - w).norm();
    previous = std::move(w);
    w = std::move(next);
    best = std::min(best, residual(w).norm());
    if (change <= 1e-13 * (1.0 + w.norm())) break;
  }
  return best;
}

}  // namespace polyreg
