#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "polyreg/types.hpp"

namespace polyreg {

// Atoms (vertices) g_n of a polyhedral unit ball, stored as the columns of
// a d x N matrix. The ball is the symmetric convex hull of {+-g_n}.
struct VertexDictionary {
  Mat cols;

  Index dim() const { return cols.rows(); }
  Index size() const { return cols.cols(); }
};

// Facet vectors f_m of a polyhedral unit ball, stored as columns of a d x M
// matrix. The ball is {x : |<f_m, x>| <= 1 for all m}.
struct FacetMatrix {
  Mat cols;

  Index dim() const { return cols.rows(); }
  Index size() const { return cols.cols(); }
};

// Regularization operator L with rows u_n^T (N x d).
struct RegularizationOperator {
  Mat rows;

  Index dim() const { return rows.cols(); }
  Index size() const { return rows.rows(); }
};

// Two-sided equivalence constants  c0 * b(x) <= a(x) <= C0 * b(x)  measured
// over a set of probe directions.
struct NormEquivalenceReport {
  double c0 = 1.0;
  double C0 = 1.0;
  double epsilon = 0.0;
  int n_samples = 0;
};

struct SynthesisResult {
  double norm = 0.0;
  Vec codes;
};

struct ZonotopeResult {
  double gauge = 0.0;
  Vec coefficients;  // t with L^T t = y and ||t||_inf = gauge
};

using NormFunction = std::function<double(const Vec&)>;

/// Numerical rank with singular values below rel_tol * sigma_max dropped.
Index numerical_rank(const Mat& m, double rel_tol = 1e-10);

/// ||F^T x||_inf.
double analysis_norm(const FacetMatrix& facets, const Vec& x);

/// ||L x||_1.
double weighted_l1_norm(const RegularizationOperator& op, const Vec& x);

/// Atomic norm min ||z||_1 s.t. V z = x, solved exactly by linear programming.
/// Throws RankError when V does not span R^d.
SynthesisResult synthesis_norm(const VertexDictionary& dict, const Vec& x);

/// Gauge of the zonotope sum_n [-u_n, u_n]: min ||t||_inf s.t. L^T t = y.
ZonotopeResult zonotope_gauge(const RegularizationOperator& op, const Vec& y);

/// Flips every column so that its first entry above 1e-12 in magnitude is
/// positive, then merges columns closer than 1e-10 and drops zero columns.
VertexDictionary canonicalize(const VertexDictionary& dict);

/// Irreducible sub-dictionary: keeps g_j iff it is not in the convex hull of
/// the remaining signed atoms, within `tol` on the constraint residual.
VertexDictionary extreme_points(const VertexDictionary& dict, double tol = 1e-9);

/// Facet vectors of the symmetric hull of the dictionary, one per
/// antipodal facet pair, each scaled so that its plane has offset 1.
/// Supported for d = 2 and d = 3 only.
FacetMatrix facets_from_vertices(const VertexDictionary& dict);

/// Samples n_samples directions uniformly on the unit sphere and records
/// the extreme values of norm_a / norm_b.
NormEquivalenceReport measure_equivalence(const NormFunction& norm_a, const NormFunction& norm_b, int d,
                                          int n_samples, std::uint64_t seed);

/// l_p norm, p in [1, inf].
double lp_norm(const Vec& x, double p);

/// Polytope inscribed in the l_p unit ball: n_pairs antipodal vertex pairs at
/// equal angles (d = 2) or on a Fibonacci hemisphere lattice (d = 3), each
/// scaled to the target's unit sphere. The result is reduced to its extreme
/// points.
VertexDictionary approximate_ball(int d, int n_vertex_pairs, double p, std::uint64_t seed);

/// The 2^(d-1) sign-canonical +-1 vectors B_d. As facets they give the l1
/// norm, as vertices they give the l_inf norm.
std::pair<FacetMatrix, VertexDictionary> l1_linf_witness(int d);

// Result of fitting ||L x||_1 to a target norm on its unit sphere.
struct L1FitResult {
  RegularizationOperator op;
  double max_relative_deviation = 0.0;
};

/// Fits a weighted l1 norm ||L x||_1 (L with n_rows rows) to `target` by
/// alternating between freezing the sign patterns sign(<u_n, x_k>) and
/// solving the resulting linear least-squares problem. Samples are drawn on
/// the target's unit sphere; the best of `restarts` random starts is kept.
L1FitResult fit_weighted_l1(const NormFunction& target, int d, int n_rows, int n_samples, int restarts,
                            std::uint64_t seed, int max_sweeps = 100);

}  // namespace polyreg
