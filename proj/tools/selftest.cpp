#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "cli.hpp"
#include "polyreg/error.hpp"
#include "polyreg/experiments.hpp"
#include "polyreg/frame.hpp"
#include "polyreg/geometry.hpp"
#include "polyreg/models.hpp"
#include "polyreg/potential.hpp"
#include "polyreg/prox.hpp"
#include "polyreg/random.hpp"
#include "polyreg/solvers.hpp"

namespace polyreg::cli {
namespace {

using io::Json;

struct GroupResult {
  bool passed = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Collects the worst violation of a group.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.detail = what;
    }
  }
  void within(double err, double tol, const std::string& what) {
    worst_ = std::max(worst_, err);
    if (!(err <= tol)) expect(false, what + ": error " + sci(err) + " > " + sci(tol));
  }
  GroupResult done() {
    if (result_.passed) result_.detail = "max error " + sci(worst_);
    return result_;
  }

 private:
  GroupResult result_;
  double worst_ = 0.0;
};

Mat random_matrix(SplitMix64& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

GroupResult norm_axioms(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const Mat M = random_matrix(rng, d, d + 3);
    const std::vector<std::pair<std::string, NormFunction>> norms{
        {"analysis", [&](const Vec& x) { return analysis_norm(FacetMatrix{M}, x); }},
        {"synthesis", [&](const Vec& x) { return synthesis_norm(VertexDictionary{M}, x).norm; }},
        {"weighted_l1", [&](const Vec& x) { return weighted_l1_norm(RegularizationOperator{M.transpose()}, x); }},
        {"zonotope", [&](const Vec& x) { return zonotope_gauge(RegularizationOperator{M.transpose()}, x).gauge; }},
    };
    for (const auto& [name, p] : norms) {
      const Vec x = rng.normal_vector(d), y = rng.normal_vector(d);
      const double alpha = 3.0 * rng.normal();
      const double px = p(x);
      c.within(std::abs(p(alpha * x) - std::abs(alpha) * px) / std::max(1.0, std::abs(alpha) * px), 1e-10,
               name + " homogeneity");
      c.expect(p(x + y) <= px + p(y) + 1e-10, name + " triangle inequality");
      c.expect(p(Vec::Zero(d)) == 0.0, name + " p(0) = 0");
      c.expect(px > 1e-12, name + " positivity");
    }
  }
  return c.done();
}

GroupResult gauge_consistency(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 2;
    const VertexDictionary V = extreme_points(VertexDictionary{random_matrix(rng, d, d + 3)});
    const FacetMatrix F = facets_from_vertices(V);
    for (int k = 0; k < 100; ++k) {
      const Vec x = rng.normal_vector(d);
      const double s = synthesis_norm(V, x).norm;
      c.within(std::abs(s - analysis_norm(F, x)) / s, 1e-8, "synthesis vs analysis of facets");
    }
  }
  return c.done();
}

GroupResult duality_inequality(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 2;
    const VertexDictionary V = extreme_points(VertexDictionary{random_matrix(rng, d, d + 4)});
    const FacetMatrix F = facets_from_vertices(V);
    for (int k = 0; k < 100; ++k) {
      Vec z = rng.normal_vector(V.size());
      z /= z.lpNorm<1>();
      const Vec x = V.cols * z;
      c.within(std::max(0.0, (F.cols.transpose() * x).cwiseAbs().maxCoeff() - 1.0), 1e-9, "|<f_m, x>| <= 1");
    }
  }
  return c.done();
}

GroupResult l1_linf_identities(SplitMix64& rng) {
  Check c;
  for (int d = 2; d <= 6; ++d) {
    const auto [F, V] = l1_linf_witness(d);
    for (int k = 0; k < 100; ++k) {
      const Vec x = rng.normal_vector(d);
      c.within(std::abs(analysis_norm(F, x) - x.lpNorm<1>()), 1e-9, "analysis(B_d) = l1");
      c.within(std::abs(synthesis_norm(V, x).norm - x.lpNorm<Eigen::Infinity>()), 1e-9, "synthesis(B_d) = linf");
    }
  }
  return c.done();
}

GroupResult zonotope_duality(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4;
    const RegularizationOperator L{random_matrix(rng, d + 2, d)};
    const Vec x = rng.normal_vector(d), y = rng.normal_vector(d);
    c.within(std::max(0.0, std::abs(x.dot(y)) - weighted_l1_norm(L, x) * zonotope_gauge(L, y).gauge), 1e-9,
             "Hoelder inequality");
    const Vec s = (L.rows * x).unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
    const Vec w = L.rows.transpose() * s;
    c.within(std::abs(x.dot(w) - weighted_l1_norm(L, x) * zonotope_gauge(L, w).gauge), 1e-8, "witness equality");
  }
  return c.done();
}

GroupResult extreme_point_idempotence(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    Mat G = random_matrix(rng, d, 6);
    // Add interior points so that something gets removed.
    Mat extra(d, 3);
    for (int k = 0; k < 3; ++k) extra.col(k) = 0.3 * (G.col(k) - G.col(k + 1));
    Mat all(d, 9);
    all << G, extra;
    const VertexDictionary once = extreme_points(VertexDictionary{all});
    const VertexDictionary twice = extreme_points(once);
    c.expect(once.cols.rows() == twice.cols.rows() && once.size() == twice.size() &&
                 (once.cols - twice.cols).norm() <= 1e-12,
             "extreme_points is not idempotent");
  }
  return c.done();
}

// Minimum of ||z||_1 over basic solutions (d-column subsets) of V z = x.
double brute_force_synthesis(const Mat& V, const Vec& x) {
  const Index d = V.rows(), n = V.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(d));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      Mat B(d, d);
      for (Index k = 0; k < d; ++k) B.col(k) = V.col(pick[static_cast<std::size_t>(k)]);
      Eigen::FullPivLU<Mat> lu(B);
      if (lu.rank() < d) return;
      best = std::min(best, lu.solve(x).lpNorm<1>());
      return;
    }
    for (int j = start; j < n; ++j) {
      pick[static_cast<std::size_t>(depth)] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

GroupResult synthesis_lp_optimality(SplitMix64& rng) {
  Check c;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 2;
    const Mat V = random_matrix(rng, d, 4 + trial % 3);
    const Vec x = rng.normal_vector(d);
    const SynthesisResult r = synthesis_norm(VertexDictionary{V}, x);
    c.within((V * r.codes - x).norm(), 1e-9, "V z = x");
    c.within(std::max(0.0, r.codes.lpNorm<1>() - brute_force_synthesis(V, x)), 1e-7, "||z||_1 minimal");
  }
  return c.done();
}

GroupResult parseval_identity(SplitMix64& rng, const std::vector<std::pair<std::string, Mat>>& frames) {
  Check c;
  for (const auto& [name, U] : frames) {
    const TightFrame T = TightFrame::unchecked(U, 24, 20);
    for (int k = 0; k < 10; ++k) {
      const Vec s = rng.normal_vector(24 * 20);
      c.within((T.synthesize(T.analyze(s)) - s).norm() / s.norm(), 1e-10, name + ": T T^T s = s");
    }
  }
  return c.done();
}

GroupResult range_projection_group(SplitMix64& rng) {
  Check c;
  for (const char* name : {"haar2", "dct3"}) {
    const TightFrame T(frame_preset(name), 16, 16);
    ChannelStack a(T.channels(), 16, 16), b(T.channels(), 16, 16);
    a.data = rng.normal_vector(a.data.size());
    b.data = rng.normal_vector(b.data.size());
    const ChannelStack pa = range_projection(T, a), pb = range_projection(T, b);
    c.within((range_projection(T, pa).data - pa.data).norm() / a.data.norm(), 1e-10, "idempotent");
    c.within(std::abs(pa.data.dot(b.data) - a.data.dot(pb.data)) / (a.data.norm() * b.data.norm()), 1e-10,
             "self-adjoint");
  }
  return c.done();
}

GroupResult prox_oracles(SplitMix64& rng) {
  Check c;
  const double step = 1e-4;
  auto argmin = [&](const std::function<double(double)>& f) {
    double best = -3.0, val = f(-3.0);
    for (long i = 1; i <= 60000; ++i) {
      const double z = -3.0 + i * step;
      const double v = f(z);
      if (v < val) val = v, best = z;
    }
    return best;
  };
  for (int k = 0; k < 5; ++k) {
    const double x = 4.0 * (rng.uniform() - 0.5), t = 0.1 + rng.uniform(), mu = 0.05 + rng.uniform();
    c.within(std::abs(soft_threshold(Vec::Constant(1, x), t)[0] -
                      argmin([&](double z) { return 0.5 * (x - z) * (x - z) + t * std::abs(z); })),
             1e-3, "soft_threshold");
    c.within(std::abs(huber_prox(x, t, mu) -
                      argmin([&](double z) { return 0.5 * (x - z) * (x - z) + t * huber_value(z, mu); })),
             1e-3, "huber prox");
    // prox_linf and the l1 projection of a 1-vector reduce to scalar problems.
    c.within(std::abs(prox_linf(Vec::Constant(1, x), t)[0] -
                      argmin([&](double z) { return 0.5 * (x - z) * (x - z) + t * std::abs(z); })),
             1e-3, "prox_linf");
  }
  // Moreau decomposition and l1-ball feasibility in higher dimension.
  for (int k = 0; k < 20; ++k) {
    const Vec z = rng.normal_vector(5);
    const double r = 0.5 + rng.uniform();
    const Vec p = project_l1_ball(z, r);
    c.within(std::max(0.0, p.lpNorm<1>() - r), 1e-12, "l1 ball feasibility");
    c.within((prox_linf(z, r) + p - z).norm(), 1e-12, "Moreau identity");
  }
  return c.done();
}

GroupResult huber_gradient(SplitMix64& rng) {
  Check c;
  const SeparablePotential h = SeparablePotential::huber(Vec::Constant(1, 1.0), 0.2);
  for (int k = 0; k < 50; ++k) {
    const double z = 3.0 * (rng.uniform() - 0.5);
    if (std::abs(std::abs(z) - 0.2) < 1e-3) continue;
    const double eps = 1e-6;
    const double fd = (h.value_scalar(0, z + eps) - h.value_scalar(0, z - eps)) / (2 * eps);
    c.within(std::abs(fd - h.grad_scalar(0, z)) / std::max(1e-8, std::abs(h.grad_scalar(0, z))), 1e-5,
             "Huber gradient vs central differences");
  }
  return c.done();
}

GroupResult tabulated_potential(SplitMix64& rng) {
  Check c;
  // The table of soft-thresholding at level 1 must reproduce the l1 prox.
  const KnotTable soft{{-2.0, -1.0, 1.0, 2.0}, {-1.0, 0.0, 0.0, 1.0}};
  const SeparablePotential tab = SeparablePotential::tabulated({soft}, Vec::Constant(1, 1.0));
  const SeparablePotential l1 = SeparablePotential::weighted_l1(Vec::Constant(1, 1.0));
  for (int k = 0; k < 50; ++k) {
    const Vec z = 4.0 * rng.normal_vector(3);
    const double tau = 0.2 + 2.0 * rng.uniform();
    c.within((tab.prox(z, 3, tau) - l1.prox(z, 3, tau)).lpNorm<Eigen::Infinity>(), 1e-12, "tabulated soft-threshold");
  }
  bool rejected = false;
  try {
    SeparablePotential::tabulated({KnotTable{{-1.0, 1.0}, {-2.0, 2.0}}});
  } catch (const PreconditionError&) {
    rejected = true;
  }
  c.expect(rejected, "a table with slope 2 must be rejected");
  return c.done();
}

GroupResult forward_adjoint(SplitMix64& rng) {
  Check c;
  MaskParams mp;
  const std::vector<ForwardModel> models{
      ForwardModel::identity(12, 10),
      ForwardModel::masked_dft(make_mask(MaskKind::kRandom, 12, 10, mp, 3)),
      ForwardModel::masked_dft(make_mask(MaskKind::kRadial, 12, 10, mp, 3)),
      ForwardModel::matrix(random_matrix(rng, 30, 120), 12, 10),
  };
  for (const ForwardModel& H : models) {
    for (int k = 0; k < 100; ++k) {
      const Vec s = rng.normal_vector(H.signal_size());
      const Vec u = rng.normal_vector(H.measurement_size());
      c.within(std::abs(H.apply(s).dot(u) - s.dot(H.adjoint(u))) / (s.norm() * u.norm()), 1e-10,
               H.kind_name() + " adjoint identity");
    }
  }
  return c.done();
}

GroupResult dft_unitary(SplitMix64& rng) {
  Check c;
  for (int k = 0; k < 10; ++k) {
    const Vec s = rng.normal_vector(16 * 12);
    const auto spec = dft2(s, 16, 12);
    double energy = 0.0;
    for (const auto& v : spec) energy += std::norm(v);
    c.within(std::abs(std::sqrt(energy) - s.norm()) / s.norm(), 1e-10, "Parseval for the unitary DFT");
    c.within((idft2_real(spec, 16, 12) - s).norm() / s.norm(), 1e-10, "inverse DFT");
  }
  return c.done();
}

GroupResult mask_determinism(SplitMix64&) {
  Check c;
  MaskParams mp;
  for (MaskKind kind : {MaskKind::kRandom, MaskKind::kRadial, MaskKind::kCartesian}) {
    const SamplingMask a = make_mask(kind, 32, 32, mp, 11), b = make_mask(kind, 32, 32, mp, 11);
    c.expect(a == b, mask_kind_name(kind) + " mask is not deterministic");
    c.expect(a.dc_kept(), mask_kind_name(kind) + " mask drops DC");
  }
  return c.done();
}

GroupResult zero_fill_consistency(SplitMix64& rng) {
  Check c;
  MaskParams mp;
  const ForwardModel H = ForwardModel::masked_dft(make_mask(MaskKind::kRandom, 16, 16, mp, 5));
  for (int k = 0; k < 10; ++k) {
    const Vec y = H.apply(rng.normal_vector(256));
    c.within((H.apply(H.adjoint(y)) - y).norm() / y.norm(), 1e-10, "H H^T y = y on the range of H");
  }
  return c.done();
}

GroupResult solver_agreement(SplitMix64&) {
  Check c;
  const Image truth = make_phantom(PhantomKind::kPiecewiseConstant, 16, 16, 1);
  const Image noisy = add_noise(truth, 0.1, 2);
  const Problem p{ForwardModel::identity(16, 16), noisy.data, TightFrame(frame_preset("haar2"), 16, 16),
                  SeparablePotential::weighted_l1(detail_weights(4)), 0.08};
  DrsOptions d;
  d.tol = 1e-10;
  d.max_iter = 100000;
  const SolveResult a = drs_solve(p, d);
  PdhgOptions po;
  po.tol = 1e-10;
  po.max_iter = 100000;
  const PdhgResult b = pdhg_weighted_l1(p, po);
  FistaOptions fo;
  fo.tol = 1e-10;
  fo.max_iter = 100000;
  const SolveResult f = fista_zonotope_synthesis(p, fo);
  const double oa = a.report.final_objective;
  c.within(std::abs(b.report.final_objective - oa) / oa, 1e-5, "DRS vs PDHG objective");
  c.within(std::abs(f.report.final_objective - oa) / oa, 1e-5, "DRS vs FISTA objective");
  c.within(a.report.optimality_residual / (1.0 + oa), 1e-4, "DRS optimality residual");
  return c.done();
}

GroupResult drs_scalar(SplitMix64&) {
  Check c;
  for (double lambda : {0.0, 1.0}) {
    const Problem p{ForwardModel::identity(1, 1), Vec::Constant(1, 3.0), TightFrame(frame_preset("identity"), 1, 1),
                    SeparablePotential::weighted_l1(Vec::Constant(1, lambda)), 1.0};
    DrsOptions o;
    o.tol = 1e-12;
    c.within(std::abs(drs_solve(p, o).image.data[0] - (3.0 - lambda)), 1e-6, "soft threshold of 3");
  }
  return c.done();
}

}  // namespace

Json run_selftest(const SelftestOptions& options, bool& passed) {
  std::vector<std::pair<std::string, Mat>> frames{
      {"identity", frame_preset("identity")}, {"haar2", frame_preset("haar2")}, {"dct3", frame_preset("dct3")}};
  if (!options.frame_file.empty()) frames.push_back({options.frame_file, io::resolve_frame(options.frame_file).U});

  using Group = std::function<GroupResult(SplitMix64&)>;
  const std::vector<std::pair<std::string, Group>> groups{
      {"norm_axioms", norm_axioms},
      {"gauge_consistency", gauge_consistency},
      {"duality_inequality", duality_inequality},
      {"l1_linf_identities", l1_linf_identities},
      {"zonotope_duality", zonotope_duality},
      {"extreme_point_idempotence", extreme_point_idempotence},
      {"synthesis_lp_optimality", synthesis_lp_optimality},
      {"parseval_identity", [&frames](SplitMix64& rng) { return parseval_identity(rng, frames); }},
      {"range_projection", range_projection_group},
      {"prox_oracles", prox_oracles},
      {"huber_gradient", huber_gradient},
      {"tabulated_potential", tabulated_potential},
      {"forward_adjoint", forward_adjoint},
      {"dft_unitary", dft_unitary},
      {"mask_determinism", mask_determinism},
      {"zero_fill_consistency", zero_fill_consistency},
      {"solver_agreement", solver_agreement},
      {"drs_scalar", drs_scalar},
  };

  passed = true;
  Json list = Json::array();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    SplitMix64 rng(options.seed + 1000 * (i + 1));
    GroupResult r;
    try {
      r = groups[i].second(rng);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    passed = passed && r.passed;
    list.push_back(Json{{"name", groups[i].first}, {"passed", r.passed}, {"detail", r.detail}});
  }
  return Json{{"passed", passed}, {"groups", list}};
}

}  // namespace polyreg::cli
