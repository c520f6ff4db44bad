#include "polyreg/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "polyreg/error.hpp"
#include "polyreg/lp.hpp"
#include "polyreg/random.hpp"

namespace polyreg {
namespace {

constexpr double kSignTol = 1e-12;
constexpr double kMergeTol = 1e-10;

void require_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected vector of length " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

void require_full_rank(const Mat& m, Index d, const char* what) {
  if (m.cols() == 0 || numerical_rank(m) < d) {
    throw RankError(std::string(what) + ": columns do not span R^" + std::to_string(d));
  }
}

Vec canonical_sign(const Vec& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > kSignTol) return v[i] < 0.0 ? Vec(-v) : v;
  }
  return v;
}

// Removes antipodal duplicates from a list of facet vectors.
FacetMatrix collect_facets(const std::vector<Vec>& normals, Index d) {
  std::vector<Vec> kept;
  for (const Vec& f : normals) {
    const Vec c = canonical_sign(f);
    const double scale = 1.0 + c.norm();
    const bool duplicate = std::any_of(kept.begin(), kept.end(),
                                       [&](const Vec& k) { return (k - c).norm() <= 1e-9 * scale; });
    if (!duplicate) kept.push_back(c);
  }
  FacetMatrix out{Mat(d, static_cast<Index>(kept.size()))};
  for (std::size_t m = 0; m < kept.size(); ++m) out.cols.col(static_cast<Index>(m)) = kept[m];
  return out;
}

std::vector<Vec> signed_points(const VertexDictionary& dict) {
  std::vector<Vec> pts;
  pts.reserve(2 * static_cast<std::size_t>(dict.size()));
  for (Index j = 0; j < dict.size(); ++j) {
    pts.push_back(dict.cols.col(j));
    pts.push_back(-dict.cols.col(j));
  }
  return pts;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

FacetMatrix facets_2d(const VertexDictionary& dict) {
  std::vector<Vec> pts = signed_points(dict);
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  const double scale = dict.cols.cwiseAbs().maxCoeff();
  const double eps = 1e-12 * scale * scale;
  // Andrew's monotone chain; collinear boundary points are dropped.
  std::vector<Vec> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i - 1]) <= eps) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  if (hull.size() < 4) throw RankError("facets_from_vertices: degenerate (collinear) hull");

  std::vector<Vec> normals;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec& a = hull[i];
    const Vec& b = hull[(i + 1) % hull.size()];
    Eigen::Matrix2d sys;
    sys << a[0], a[1], b[0], b[1];
    const Eigen::Vector2d f = sys.fullPivLu().solve(Eigen::Vector2d::Ones());
    normals.push_back(f);
  }
  return collect_facets(normals, 2);
}

// Incremental convex hull of a point set containing the origin in its
// interior. Faces are kept oriented with outward normals.
FacetMatrix facets_3d(const VertexDictionary& dict) {
  using P3 = Eigen::Vector3d;
  std::vector<P3> pts;
  for (const Vec& v : signed_points(dict)) pts.emplace_back(v[0], v[1], v[2]);
  const double scale = dict.cols.cwiseAbs().maxCoeff();
  const double eps = 1e-10 * scale;

  // Initial tetrahedron from an extreme point, the farthest point from it,
  // the farthest from their line and the farthest from their plane.
  const std::size_t n = pts.size();
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (pts[i].norm() > pts[i0].norm()) i0 = i;
  std::size_t i1 = i0;
  for (std::size_t i = 0; i < n; ++i)
    if ((pts[i] - pts[i0]).norm() > (pts[i1] - pts[i0]).norm()) i1 = i;
  const P3 dir = (pts[i1] - pts[i0]).normalized();
  auto line_dist = [&](const P3& p) {
    const P3 r = p - pts[i0];
    return (r - r.dot(dir) * dir).norm();
  };
  std::size_t i2 = i0;
  for (std::size_t i = 0; i < n; ++i)
    if (line_dist(pts[i]) > line_dist(pts[i2])) i2 = i;
  const P3 pn = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]);
  if (pn.norm() <= eps * scale) throw RankError("facets_from_vertices: degenerate (collinear) hull");
  std::size_t i3 = i0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(pn.dot(pts[i] - pts[i0])) > std::abs(pn.dot(pts[i3] - pts[i0]))) i3 = i;
  if (std::abs(pn.normalized().dot(pts[i3] - pts[i0])) <= eps) {
    throw RankError("facets_from_vertices: degenerate (coplanar) hull");
  }

  const P3 interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  using Face = std::array<std::size_t, 3>;
  auto oriented = [&](std::size_t a, std::size_t b, std::size_t c) -> Face {
    const P3 nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (nrm.dot(pts[a] - interior) < 0.0) return {a, c, b};
    return {a, b, c};
  };
  auto visible = [&](const Face& f, const P3& p) {
    const P3 nrm = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
    const double len = nrm.norm();
    return len > 0.0 && nrm.dot(p - pts[f[0]]) / len > eps;
  };

  std::vector<Face> faces = {oriented(i0, i1, i2), oriented(i0, i1, i3), oriented(i0, i2, i3),
                             oriented(i1, i2, i3)};
  for (std::size_t p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<Face> kept;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    bool any = false;
    for (const Face& f : faces) {
      if (visible(f, pts[p])) {
        any = true;
        for (int e = 0; e < 3; ++e) edges.emplace(f[e], f[(e + 1) % 3]);
      } else {
        kept.push_back(f);
      }
    }
    if (!any) continue;
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a}) == 0) kept.push_back({a, b, p});
    }
    faces = std::move(kept);
  }

  std::vector<Vec> normals;
  for (const Face& f : faces) {
    const P3 nrm = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
    const double offset = nrm.dot(pts[f[0]]);
    if (offset <= eps * nrm.norm()) throw RankError("facets_from_vertices: origin not interior to the hull");
    normals.emplace_back(Vec(nrm / offset));
  }
  return collect_facets(normals, 3);
}

}  // namespace

Index numerical_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

double analysis_norm(const FacetMatrix& facets, const Vec& x) {
  require_dim(facets.dim(), x.size(), "analysis_norm");
  if (facets.size() == 0) return 0.0;
  return (facets.cols.transpose() * x).lpNorm<Eigen::Infinity>();
}

double weighted_l1_norm(const RegularizationOperator& op, const Vec& x) {
  require_dim(op.dim(), x.size(), "weighted_l1_norm");
  if (op.size() == 0) return 0.0;
  return (op.rows * x).lpNorm<1>();
}

SynthesisResult synthesis_norm(const VertexDictionary& dict, const Vec& x) {
  require_dim(dict.dim(), x.size(), "synthesis_norm");
  require_full_rank(dict.cols, dict.dim(), "synthesis_norm");
  const Index n = dict.size();
  if (x.isZero(0.0)) return {0.0, Vec::Zero(n)};

  Mat A(dict.dim(), 2 * n);
  A << dict.cols, -dict.cols;
  const lp::Result res = lp::solve_standard_form(A, x, Vec::Ones(2 * n));
  if (res.status != lp::Status::kOptimal) {
    throw RankError("synthesis_norm: linear program did not reach an optimum (x outside the span of V)");
  }
  Vec z = res.x.head(n) - res.x.tail(n);
  return {z.lpNorm<1>(), std::move(z)};
}

ZonotopeResult zonotope_gauge(const RegularizationOperator& op, const Vec& y) {
  require_dim(op.dim(), y.size(), "zonotope_gauge");
  const Index n = op.size();
  const Index d = op.dim();
  if (y.isZero(0.0)) return {0.0, Vec::Zero(n)};
  require_full_rank(op.rows, d, "zonotope_gauge");

  // Variables: t+ (n), t- (n), tau (1), slack s (n).
  //   L^T (t+ - t-) = y
  //   t+_k + t-_k - tau + s_k = 0
  const Index nv = 3 * n + 1;
  Mat A = Mat::Zero(d + n, nv);
  A.block(0, 0, d, n) = op.rows.transpose();
  A.block(0, n, d, n) = -op.rows.transpose();
  for (Index k = 0; k < n; ++k) {
    A(d + k, k) = 1.0;
    A(d + k, n + k) = 1.0;
    A(d + k, 2 * n) = -1.0;
    A(d + k, 2 * n + 1 + k) = 1.0;
  }
  Vec b = Vec::Zero(d + n);
  b.head(d) = y;
  Vec c = Vec::Zero(nv);
  c[2 * n] = 1.0;
  const lp::Result res = lp::solve_standard_form(A, b, c);
  if (res.status != lp::Status::kOptimal) throw RankError("zonotope_gauge: y is not in the range of L^T");
  Vec t = res.x.head(n) - res.x.segment(n, n);
  return {t.lpNorm<Eigen::Infinity>(), std::move(t)};
}

VertexDictionary canonicalize(const VertexDictionary& dict) {
  std::vector<Vec> kept;
  for (Index j = 0; j < dict.size(); ++j) {
    const Vec g = canonical_sign(dict.cols.col(j));
    if (g.norm() <= kSignTol) continue;
    const bool duplicate =
        std::any_of(kept.begin(), kept.end(), [&](const Vec& k) { return (k - g).norm() <= kMergeTol; });
    if (!duplicate) kept.push_back(g);
  }
  VertexDictionary out{Mat(dict.dim(), static_cast<Index>(kept.size()))};
  for (std::size_t j = 0; j < kept.size(); ++j) out.cols.col(static_cast<Index>(j)) = kept[j];
  return out;
}

VertexDictionary extreme_points(const VertexDictionary& dict, double tol) {
  if (dict.size() == 0 || dict.dim() == 0) throw PreconditionError("extreme_points: empty dictionary");
  const VertexDictionary canon = canonicalize(dict);
  const Index n = canon.size();
  const Index d = canon.dim();
  if (n <= 1) return canon;

  lp::Options options;
  options.feasibility_tol = tol;
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j) {
    // Is g_j = sum_i lambda_i (+-g_i), lambda >= 0, sum lambda = 1 ?
    Mat A(d + 1, 2 * (n - 1));
    Index col = 0;
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      A.block(0, col, d, 1) = canon.cols.col(i);
      A.block(0, col + n - 1, d, 1) = -canon.cols.col(i);
      ++col;
    }
    A.row(d).setOnes();
    Vec b(d + 1);
    b << canon.cols.col(j), 1.0;
    const lp::Result res = lp::find_feasible(A, b, options);
    if (res.infeasibility > tol) keep.push_back(j);
  }
  VertexDictionary out{Mat(d, static_cast<Index>(keep.size()))};
  for (std::size_t k = 0; k < keep.size(); ++k) out.cols.col(static_cast<Index>(k)) = canon.cols.col(keep[k]);
  return out;
}

FacetMatrix facets_from_vertices(const VertexDictionary& dict) {
  const Index d = dict.dim();
  if (d != 2 && d != 3) {
    throw PreconditionError("facets_from_vertices: only d = 2 and d = 3 are supported (got d = " +
                            std::to_string(d) + ")");
  }
  require_full_rank(dict.cols, d, "facets_from_vertices");
  return d == 2 ? facets_2d(dict) : facets_3d(dict);
}

NormEquivalenceReport measure_equivalence(const NormFunction& norm_a, const NormFunction& norm_b, int d,
                                          int n_samples, std::uint64_t seed) {
  if (d < 1 || n_samples < 1) throw PreconditionError("measure_equivalence: need d >= 1 and n_samples >= 1");
  SplitMix64 rng(seed);
  NormEquivalenceReport report;
  report.c0 = std::numeric_limits<double>::infinity();
  report.C0 = 0.0;
  report.n_samples = n_samples;
  for (int k = 0; k < n_samples; ++k) {
    Vec u = rng.normal_vector(d);
    u /= u.norm();
    const double a = norm_a(u);
    const double b = norm_b(u);
    if (!(a > 0.0) || !(b > 0.0)) throw NotANormError("measure_equivalence: norm vanished on a nonzero probe");
    const double r = a / b;
    report.c0 = std::min(report.c0, r);
    report.C0 = std::max(report.C0, r);
  }
  report.epsilon = std::max({report.C0 - 1.0, 1.0 - report.c0, 0.0});
  return report;
}

double lp_norm(const Vec& x, double p) {
  if (p < 1.0) throw PreconditionError("lp_norm: p must be >= 1");
  if (std::isinf(p)) return x.lpNorm<Eigen::Infinity>();
  if (p == 1.0) return x.lpNorm<1>();
  if (p == 2.0) return x.norm();
  const double m = x.lpNorm<Eigen::Infinity>();
  if (m == 0.0) return 0.0;
  return m * std::pow((x / m).array().abs().pow(p).sum(), 1.0 / p);
}

namespace {

// Unit-length antipodal-pair lattice: equal angles (d = 2) or a Fibonacci
// hemisphere (d = 3), rotated by `offset` in [0, 1).
Mat sphere_lattice(int d, int n_pairs, double offset) {
  Mat cols(d, n_pairs);
  if (d == 2) {
    for (int k = 0; k < n_pairs; ++k) {
      const double theta = (k + offset) * std::numbers::pi / n_pairs;
      double c = std::cos(theta);
      double s = std::sin(theta);
      if (std::abs(c) < 1e-15) c = 0.0;
      if (std::abs(s) < 1e-15) s = 0.0;
      cols.col(k) << c, s;
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n_pairs; ++k) {
      const double z = 1.0 - (k + 0.5) / n_pairs;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = (k + offset) * golden;
      cols.col(k) << r * std::cos(phi), r * std::sin(phi), z;
    }
  }
  return cols;
}

}  // namespace

VertexDictionary approximate_ball(int d, int n_vertex_pairs, double p, std::uint64_t seed) {
  if (d != 2 && d != 3) throw PreconditionError("approximate_ball: d must be 2 or 3");
  if (n_vertex_pairs < d) throw RankError("approximate_ball: need at least d vertex pairs to span R^d");
  // seed = 0 keeps the canonical lattice; any other seed rotates it.
  SplitMix64 rng(seed);
  const double offset = seed == 0 ? 0.0 : rng.uniform();
  Mat cols = sphere_lattice(d, n_vertex_pairs, offset);
  for (int k = 0; k < n_vertex_pairs; ++k) cols.col(k) /= lp_norm(cols.col(k), p);
  return extreme_points(VertexDictionary{cols});
}

std::pair<FacetMatrix, VertexDictionary> l1_linf_witness(int d) {
  if (d < 1) throw PreconditionError("l1_linf_witness: d must be positive");
  if (d > 12) throw PreconditionError("l1_linf_witness: d must be <= 12 (2^(d-1) columns)");
  const Index n = Index{1} << (d - 1);
  Mat b(d, n);
  for (Index j = 0; j < n; ++j) {
    b(0, j) = 1.0;
    for (int i = 1; i < d; ++i) b(i, j) = ((j >> (i - 1)) & 1) ? -1.0 : 1.0;
  }
  return {FacetMatrix{b}, VertexDictionary{b}};
}

namespace {

// Lawson-Hanson active-set solver for min ||A w - b||_2 s.t. w >= 0, working
// on the Gram matrix G = A^T A and c = A^T b.
Vec nnls_gram(const Mat& G, const Vec& c, int max_outer = 500) {
  const Index n = G.rows();
  Vec w = Vec::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
  auto solve_passive = [&](std::vector<Index>& idx) {
    idx.clear();
    for (Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Mat Gp(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
    Vec cp(static_cast<Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      cp[static_cast<Index>(a)] = c[idx[a]];
      for (std::size_t b = 0; b < idx.size(); ++b) Gp(static_cast<Index>(a), static_cast<Index>(b)) = G(idx[a], idx[b]);
    }
    Gp.diagonal().array() += 1e-13 * (1.0 + Gp.diagonal().maxCoeff());
    return Vec(Gp.ldlt().solve(cp));
  };
  for (int outer = 0; outer < max_outer; ++outer) {
    const Vec grad = c - G * w;
    Index best = -1;
    double best_val = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    std::vector<Index> idx;
    for (int inner = 0; inner < 1000; ++inner) {
      const Vec z = solve_passive(idx);
      if (z.minCoeff() > 0.0) {
        w.setZero();
        for (std::size_t a = 0; a < idx.size(); ++a) w[idx[a]] = z[static_cast<Index>(a)];
        break;
      }
      // Step towards z until the first passive weight hits zero.
      double alpha = 1.0;
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const double za = z[static_cast<Index>(a)];
        if (za <= 0.0) alpha = std::min(alpha, w[idx[a]] / (w[idx[a]] - za));
      }
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const Index j = idx[a];
        w[j] += alpha * (z[static_cast<Index>(a)] - w[j]);
        if (w[j] <= 1e-15) {
          w[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  return w;
}

// Candidate row directions for the dictionary start.
Mat direction_dictionary(int d, SplitMix64& rng) {
  if (d == 2 || d == 3) return sphere_lattice(d, d == 2 ? 360 : 1000, 0.0);
  Mat dirs(d, 200 * d);
  for (Index j = 0; j < dirs.cols(); ++j) {
    const Vec u = rng.normal_vector(d);
    dirs.col(j) = u / u.norm();
  }
  return dirs;
}

}  // namespace

L1FitResult fit_weighted_l1(const NormFunction& target, int d, int n_rows, int n_samples, int restarts,
                            std::uint64_t seed, int max_sweeps) {
  if (d < 1 || n_rows < 1 || n_samples < 1 || restarts < 1) {
    throw PreconditionError("fit_weighted_l1: sizes must be positive");
  }
  SplitMix64 rng(seed);
  Mat samples(d, n_samples);
  for (int k = 0; k < n_samples; ++k) {
    Vec u = rng.normal_vector(d);
    samples.col(k) = u / target(u);
  }

  const Index unknowns = static_cast<Index>(n_rows) * d;
  auto deviation = [&](const Mat& L) {
    const Vec fitted = (L * samples).cwiseAbs().colwise().sum().transpose();
    return (fitted.array() - 1.0).abs().maxCoeff();
  };

  L1FitResult best;
  best.max_relative_deviation = std::numeric_limits<double>::infinity();

  // Alternates between freezing sign(L x_k) and a linear least-squares solve.
  auto refine = [&](Mat L) {
    Eigen::MatrixXi prev_signs;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const Mat proj = L * samples;
      Eigen::MatrixXi signs = (proj.array() >= 0.0).cast<int>() * 2 - 1;
      if (sweep > 0 && signs == prev_signs) break;
      // Row k of the design matrix is kron(signs(:, k), x_k).
      Mat normal = Mat::Zero(unknowns, unknowns);
      Vec rhs = Vec::Zero(unknowns);
      Vec row(unknowns);
      for (int k = 0; k < n_samples; ++k) {
        for (int m = 0; m < n_rows; ++m) row.segment(static_cast<Index>(m) * d, d) = signs(m, k) * samples.col(k);
        normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
        rhs += row;
      }
      normal.diagonal().array() += 1e-14 * (1.0 + normal.diagonal().maxCoeff());
      const Vec theta = normal.selfadjointView<Eigen::Lower>().ldlt().solve(rhs);
      for (int m = 0; m < n_rows; ++m) L.row(m) = theta.segment(static_cast<Index>(m) * d, d).transpose();
      prev_signs = std::move(signs);
      const double dev = deviation(L);
      if (dev < best.max_relative_deviation) {
        best.max_relative_deviation = dev;
        best.op.rows = L;
      }
    }
  };

  // Dictionary start: nonnegative least squares over many fixed directions,
  // ||x|| ~ sum_j w_j |<u_j, x>|, keeping the n_rows largest weights.
  {
    const Mat dirs = direction_dictionary(d, rng);
    const Mat A = (dirs.transpose() * samples).cwiseAbs().transpose();
    const Vec ones = Vec::Ones(n_samples);
    Vec w = nnls_gram(A.transpose() * A, A.transpose() * ones);
    std::vector<Index> order(static_cast<std::size_t>(w.size()));
    for (Index j = 0; j < w.size(); ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return w[a] > w[b]; });
    Index kept = 0;
    while (kept < w.size() && kept < n_rows && w[order[static_cast<std::size_t>(kept)]] > 0.0) ++kept;
    if (kept < w.size() && kept == n_rows && w[order[static_cast<std::size_t>(kept)]] > 0.0) {
      // Too many active directions: refit on the strongest n_rows.
      Mat Ak(n_samples, kept);
      for (Index a = 0; a < kept; ++a) Ak.col(a) = A.col(order[static_cast<std::size_t>(a)]);
      const Vec wk = nnls_gram(Ak.transpose() * Ak, Ak.transpose() * ones);
      w.setZero();
      for (Index a = 0; a < kept; ++a) w[order[static_cast<std::size_t>(a)]] = wk[a];
    }
    Mat L = Mat::Zero(n_rows, d);
    for (Index a = 0; a < kept; ++a) {
      const Index j = order[static_cast<std::size_t>(a)];
      L.row(a) = w[j] * dirs.col(j).transpose();
    }
    const double dev = deviation(L);
    if (dev < best.max_relative_deviation) {
      best.max_relative_deviation = dev;
      best.op.rows = L;
    }
    refine(L);
  }

  for (int r = 0; r < restarts; ++r) {
    Mat L(n_rows, d);
    for (Index i = 0; i < L.size(); ++i) L.data()[i] = rng.normal();
    L /= std::max(1e-12, (L * samples).cwiseAbs().colwise().sum().mean());
    refine(L);
  }
  return best;
}

}  // namespace polyreg
