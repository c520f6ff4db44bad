#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "polyreg/error.hpp"
#include "polyreg/experiments.hpp"
#include "polyreg/frame.hpp"
#include "polyreg/geometry.hpp"
#include "polyreg/models.hpp"
#include "polyreg/potential.hpp"
#include "polyreg/random.hpp"
#include "polyreg/solvers.hpp"

namespace polyreg::cli {
namespace {

using io::Json;

// Options that can also come from the --config JSON file. Values given on
// the command line win over the file.
class Bindings {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, var, help)->capture_default_str();
    items_.push_back({key, opt, [&var](const Json& j) { var = j.get<T>(); }, [&var] { return Json(var); }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, bool& var,
                        const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, var, help);
    items_.push_back({key, opt, [&var](const Json& j) { var = j.get<bool>(); }, [&var] { return Json(var); }});
    return opt;
  }

  void merge(const Json& config) {
    if (!config.is_object()) throw ParseError("--config: top level must be a JSON object");
    for (auto it = config.begin(); it != config.end(); ++it) {
      if (it.key() == "command") continue;  // written by resolved_config.json
      auto item = std::find_if(items_.begin(), items_.end(), [&](const Item& i) { return i.key == it.key(); });
      if (item == items_.end()) throw ParseError("--config: unknown key '" + it.key() + "'");
      if (item->opt->count() > 0) continue;
      try {
        item->load(it.value());
      } catch (const Json::exception& e) {
        throw ParseError("--config: key '" + it.key() + "': " + e.what());
      }
    }
  }

  Json resolved() const {
    Json j = Json::object();
    for (const Item& i : items_) j[i.key] = i.dump();
    return j;
  }

 private:
  struct Item {
    std::string key;
    CLI::Option* opt;
    std::function<void(const Json&)> load;
    std::function<Json()> dump;
  };
  std::vector<Item> items_;
};

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* app, Bindings& b, Common& c) {
  app->add_option("--config", c.config, "JSON file with option values; flags override it")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  b.add(app, "--seed", "seed", c.seed, "64-bit seed");
}

std::filesystem::path prepare_out(const Common& c) {
  std::filesystem::path dir(c.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create output directory '" + c.out + "': " + ec.message());
  return dir;
}

void finish_config(Bindings& b, const Common& c) {
  if (!c.config.empty()) b.merge(io::read_json(c.config));
}

void write_resolved(const std::filesystem::path& dir, const Bindings& b, const std::string& command) {
  Json j = b.resolved();
  j["command"] = command;
  io::write_json((dir / "resolved_config.json").string(), j);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(15) << v;
  return ss.str();
}

// ---------------------------------------------------------------- norm

struct NormArgs {
  Common common;
  std::string form = "analysis";
  std::string matrix;
  std::vector<std::string> x;
  std::string x_file;
  int d = 2;
};

Mat gather_vectors(const NormArgs& a, Index d) {
  std::vector<Vec> list;
  for (const std::string& s : a.x) list.push_back(io::parse_vector(s));
  if (!a.x_file.empty()) {
    const Mat m = io::read_matrix(a.x_file);
    for (Index j = 0; j < m.cols(); ++j) list.push_back(m.col(j));
  }
  if (list.empty()) throw PreconditionError("norm eval: give at least one vector with --x or --x-file");
  Mat out(d, static_cast<Index>(list.size()));
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (list[k].size() != d) {
      throw DimensionError("norm eval: vector " + std::to_string(k + 1) + " has " + std::to_string(list[k].size()) +
                           " entries, the matrix has d = " + std::to_string(d));
    }
    out.col(static_cast<Index>(k)) = list[k];
  }
  return out;
}

int cmd_norm_eval(const NormArgs& a, const Bindings& b) {
  const Mat M = io::read_matrix(a.matrix);
  const Mat X = gather_vectors(a, M.rows());
  std::vector<double> values;
  for (Index k = 0; k < X.cols(); ++k) {
    const Vec x = X.col(k);
    double v = 0.0;
    if (a.form == "analysis") {
      v = analysis_norm(FacetMatrix{M}, x);
    } else if (a.form == "synthesis") {
      v = synthesis_norm(VertexDictionary{M}, x).norm;
    } else if (a.form == "weighted_l1") {
      v = weighted_l1_norm(RegularizationOperator{M.transpose()}, x);
    } else if (a.form == "zonotope") {
      v = zonotope_gauge(RegularizationOperator{M.transpose()}, x).gauge;
    } else {
      throw ParseError("norm eval: unknown --form '" + a.form + "'");
    }
    values.push_back(v);
    std::cout << format_number(v) << '\n';
  }
  const auto dir = prepare_out(a.common);
  io::write_json((dir / "metrics.json").string(), Json{{"form", a.form}, {"values", values}});
  write_resolved(dir, b, "norm eval");
  return kOk;
}

int write_matrix_result(const NormArgs& a, const Bindings& b, const Mat& m, const std::string& command, Json metrics) {
  const auto dir = prepare_out(a.common);
  io::write_matrix((dir / "report.csv").string(), m);
  std::cout << m.rows() << ',' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) std::cout << (c ? "," : "") << format_number(m(r, c));
    std::cout << '\n';
  }
  metrics["matrix"] = io::matrix_to_json(m);
  io::write_json((dir / "metrics.json").string(), metrics);
  write_resolved(dir, b, command);
  return kOk;
}

// ---------------------------------------------------------------- approx

struct ApproxArgs {
  Common common;
  int d = 2;
  std::string n_list = "8,16,32,64,128";
  std::string target = "l2";
  int samples = 20000;
};

double parse_target(const std::string& t) {
  if (t == "l1") return 1.0;
  if (t == "l2") return 2.0;
  if (t == "linf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double p = std::stod(t, &used);
    if (used == t.size() && p >= 1.0) return p;
  } catch (const std::exception&) {
  }
  throw ParseError("approx: --target must be l1, l2, linf or a number p >= 1");
}

int cmd_approx(const ApproxArgs& a, const Bindings& b) {
  if (a.d != 2 && a.d != 3) throw PreconditionError("approx: d must be 2 or 3");
  const double p = parse_target(a.target);
  std::vector<int> ns;
  for (double v : io::parse_vector(a.n_list)) {
    if (v < a.d || v != std::floor(v)) throw ParseError("approx: every n must be an integer >= d");
    ns.push_back(static_cast<int>(v));
  }
  const NormFunction target = [p](const Vec& x) { return lp_norm(x, p); };
  const auto dir = prepare_out(a.common);
  std::ofstream csv(dir / "report.csv");
  csv << "n,vertex_pairs,epsilon,c0,C0\n";
  csv << std::setprecision(17);
  Json rows = Json::array();
  std::vector<double> lx, ly;
  for (int n : ns) {
    const VertexDictionary V = approximate_ball(a.d, n, p, a.common.seed);
    const FacetMatrix F = facets_from_vertices(V);
    const NormFunction poly = [&F](const Vec& x) { return analysis_norm(F, x); };
    const NormEquivalenceReport r = measure_equivalence(poly, target, a.d, a.samples, a.common.seed);
    csv << n << ',' << V.size() << ',' << r.epsilon << ',' << r.c0 << ',' << r.C0 << '\n';
    Json row = io::equivalence_to_json(r);
    row["n"] = n;
    row["vertex_pairs"] = V.size();
    rows.push_back(row);
    std::cout << "n=" << n << " epsilon=" << format_number(r.epsilon) << '\n';
    if (r.epsilon > 0.0) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(r.epsilon));
    }
  }
  Json metrics{{"d", a.d}, {"target", a.target}, {"rows", rows}};
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    metrics["slope"] = slope;
    metrics["intercept"] = my - slope * mx;
    std::cout << "slope=" << format_number(slope) << '\n';
  } else {
    metrics["slope"] = nullptr;
  }
  io::write_json((dir / "metrics.json").string(), metrics);
  write_resolved(dir, b, "approx");
  return kOk;
}

// ---------------------------------------------------------------- denoise / mri

struct RegularizerArgs {
  std::string frame = "haar2";
  std::string potential = "weighted_l1";
  double mu = 1e-2;
  double lambda = 0.1;
  bool tune = false;
  bool tv = false;
  std::string algorithm = "drs";
  double tau = 1.0;
  double tol = 1e-5;
  int max_iter = 5000;
  bool momentum = false;
  int bits = 8;
};

void add_regularizer(CLI::App* app, Bindings& b, RegularizerArgs& r) {
  b.add(app, "--frame", "frame", r.frame, "frame preset (identity, haar2, dct3) or frame JSON file");
  b.add(app, "--potential", "potential", r.potential, "weighted_l1, huber, tabulated, or a potential JSON file");
  b.add(app, "--mu", "mu", r.mu, "Huber parameter");
  b.add(app, "--lambda", "lambda", r.lambda, "global regularization weight");
  b.add_flag(app, "--tune", "tune", r.tune, "grid-search lambda over logspace(-3, 0, 20) against the ground truth");
  b.add_flag(app, "--tv", "tv", r.tv, "also run the total-variation baseline");
  b.add(app, "--algorithm", "algorithm", r.algorithm, "drs, apgd, fista or pdhg");
  b.add(app, "--tau", "tau", r.tau, "step size");
  b.add(app, "--tol", "tol", r.tol, "stopping tolerance");
  b.add(app, "--max-iter", "max_iter", r.max_iter, "iteration cap");
  b.add_flag(app, "--momentum", "momentum", r.momentum, "extrapolation for apgd");
  b.add(app, "--bits", "bits", r.bits, "PGM output depth (8 or 16)");
}

io::SolverConfig solver_config(const RegularizerArgs& r) {
  io::SolverConfig c;
  c.algorithm = r.algorithm;
  c.tau = r.tau;
  c.tol = r.tol;
  c.max_iter = r.max_iter;
  c.momentum = r.momentum;
  return c;
}

SeparablePotential build_potential(const RegularizerArgs& r, int channels) {
  if (r.potential == "weighted_l1") return SeparablePotential::weighted_l1(detail_weights(channels));
  if (r.potential == "huber") return SeparablePotential::huber(detail_weights(channels), r.mu);
  if (r.potential == "tabulated") {
    throw PreconditionError("a tabulated potential needs knot tables; pass a potential JSON file instead");
  }
  return io::potential_from_json(io::read_json(r.potential), channels);
}

TightFrame build_frame(const RegularizerArgs& r, int h, int w) {
  const io::FrameSpec spec = io::resolve_frame(r.frame);
  return TightFrame(spec.U, h, w, spec.zero_mean);
}

struct Reconstruction {
  SolveResult result;
  double lambda = 0.0;
  Json tuning = nullptr;
};

Reconstruction reconstruct(const RegularizerArgs& r, const ForwardModel& model, const Vec& y, const TightFrame& frame,
                           const SeparablePotential& potential, const Image* truth) {
  const io::SolverConfig config = solver_config(r);
  auto solve = [&](double lambda) { return run_solver(Problem{model, y, frame, potential, lambda}, config); };
  Reconstruction out;
  if (!r.tune) {
    out.lambda = r.lambda;
    out.result = solve(r.lambda);
    return out;
  }
  if (truth == nullptr) throw PreconditionError("--tune needs a ground-truth image");
  TuneResult t = tune_lambda(default_lambda_grid(), solve, *truth);
  out.lambda = t.lambda;
  out.result.image = std::move(t.image);
  out.result.report = std::move(t.report);
  out.tuning = Json::array();
  for (const TunePoint& p : t.curve) out.tuning.push_back(Json{{"lambda", p.lambda}, {"psnr", finite_or_null(p.psnr)}});
  return out;
}

void write_residuals(const std::filesystem::path& path, const SolveReport& report) {
  std::ofstream csv(path);
  csv << "iteration,relative_change\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.residual_history.size(); ++i) csv << i + 1 << ',' << report.residual_history[i] << '\n';
}

void write_image(const std::filesystem::path& dir, const std::string& stem, const Image& img, int bits) {
  io::write_pgm((dir / (stem + ".pgm")).string(), img, bits);
  io::write_pfmg((dir / (stem + ".pfmg")).string(), img);
}

struct ImageSource {
  std::string input;
  std::string phantom = "piecewise_constant";
  int size = 64;
};

void add_source(CLI::App* app, Bindings& b, ImageSource& s) {
  b.add(app, "--input", "input", s.input, "ground-truth image (PGM or PFMG); overrides --phantom");
  b.add(app, "--phantom", "phantom", s.phantom, "piecewise_constant or shepp_like");
  b.add(app, "--size", "size", s.size, "phantom side length");
}

Image load_source(const ImageSource& s, std::uint64_t seed) {
  if (!s.input.empty()) return io::read_image(s.input);
  return make_phantom(parse_phantom_kind(s.phantom), s.size, s.size, seed);
}

struct DenoiseArgs {
  Common common;
  ImageSource source;
  RegularizerArgs reg;
  double sigma = 25.0 / 255.0;
  bool noisy_input = false;
};

int cmd_denoise(const DenoiseArgs& a, const Bindings& b) {
  const Image loaded = load_source(a.source, a.common.seed);
  if (a.sigma < 0.0) throw PreconditionError("denoise: sigma must be nonnegative");
  const bool has_truth = !a.noisy_input;
  const Image noisy = a.noisy_input ? loaded : add_noise(loaded, a.sigma, a.common.seed + 1);
  const TightFrame frame = build_frame(a.reg, noisy.h, noisy.w);
  const SeparablePotential potential = build_potential(a.reg, frame.channels());
  const ForwardModel model = ForwardModel::identity(noisy.h, noisy.w);
  const Reconstruction rec = reconstruct(a.reg, model, noisy.data, frame, potential, has_truth ? &loaded : nullptr);

  const auto dir = prepare_out(a.common);
  write_image(dir, "result", rec.result.image, a.reg.bits);
  write_image(dir, "noisy", noisy, a.reg.bits);
  write_residuals(dir / "report.csv", rec.result.report);

  Json metrics;
  metrics["lambda"] = rec.lambda;
  metrics["iterations"] = rec.result.report.iterations;
  metrics["objective"] = finite_or_null(rec.result.report.final_objective);
  metrics["converged"] = rec.result.report.converged;
  metrics["algorithm"] = rec.result.report.algorithm;
  metrics["psnr_noisy"] = has_truth ? finite_or_null(psnr(loaded, noisy)) : Json(nullptr);
  metrics["psnr_denoised"] = has_truth ? finite_or_null(psnr(loaded, rec.result.image)) : Json(nullptr);
  if (has_truth) {
    // +infinity PSNR (exact match) is reported as a flag since JSON has no infinity.
    metrics["psnr_noisy_infinite"] = std::isinf(psnr(loaded, noisy));
    metrics["psnr_denoised_infinite"] = std::isinf(psnr(loaded, rec.result.image));
  }
  metrics["tuning"] = rec.tuning;
  metrics["report"] = io::report_to_json(rec.result.report);
  if (a.reg.tv) {
    double tv_lambda = a.reg.lambda;
    Image tv;
    if (a.reg.tune && has_truth) {
      const TuneResult t = tune_lambda(
          default_lambda_grid(),
          [&](double l) { return SolveResult{tv_denoise(noisy, l, a.reg.tol, a.reg.max_iter), Vec(), SolveReport{}}; },
          loaded);
      tv_lambda = t.lambda;
      tv = t.image;
    } else {
      tv = tv_denoise(noisy, tv_lambda, a.reg.tol, a.reg.max_iter);
    }
    write_image(dir, "tv", tv, a.reg.bits);
    metrics["tv_lambda"] = tv_lambda;
    metrics["psnr_tv"] = has_truth ? finite_or_null(psnr(loaded, tv)) : Json(nullptr);
  }
  io::write_json((dir / "metrics.json").string(), metrics);
  write_resolved(dir, b, "denoise");
  std::cout << "lambda=" << format_number(rec.lambda) << " iterations=" << rec.result.report.iterations;
  if (has_truth) {
    std::cout << " psnr_noisy=" << format_number(psnr(loaded, noisy))
              << " psnr_denoised=" << format_number(psnr(loaded, rec.result.image));
  }
  std::cout << '\n';
  return kOk;
}

struct MriArgs {
  Common common;
  ImageSource source;
  RegularizerArgs reg;
  std::string mask = "radial";
  int lines = 30;
  double density = 0.3;
  double sigma_c = 0.0;
  double noise = 0.0;
};

int cmd_mri(const MriArgs& a, const Bindings& b) {
  const Image truth = load_source(a.source, a.common.seed);
  SamplingMask mask;
  if (a.mask == "random" || a.mask == "radial" || a.mask == "cartesian") {
    MaskParams mp;
    mp.n_lines = a.lines;
    mp.density = a.density;
    mp.sigma_c = a.sigma_c;
    mask = make_mask(parse_mask_kind(a.mask), truth.h, truth.w, mp, a.common.seed);
  } else {
    mask = io::read_mask(a.mask);
    if (mask.h != truth.h || mask.w != truth.w) throw DimensionError("mri: mask shape differs from the image shape");
    hermitian_complete(mask);
  }
  if (a.noise < 0.0) throw PreconditionError("mri: --noise must be nonnegative");
  const ForwardModel model = ForwardModel::masked_dft(mask);
  Vec y = model.apply(truth);
  if (a.noise > 0.0) {
    SplitMix64 rng(a.common.seed + 1);
    for (Index i = 0; i < y.size(); ++i) y[i] += a.noise * rng.normal();
  }
  const Image zero_fill = model.adjoint_image(y);
  const TightFrame frame = build_frame(a.reg, truth.h, truth.w);
  const SeparablePotential potential = build_potential(a.reg, frame.channels());
  const Reconstruction rec = reconstruct(a.reg, model, y, frame, potential, &truth);

  const auto dir = prepare_out(a.common);
  write_image(dir, "result", rec.result.image, a.reg.bits);
  write_image(dir, "zero_fill", zero_fill, a.reg.bits);
  io::write_pbm((dir / "mask.pbm").string(), mask);
  io::write_measurements((dir / "measurements.bin").string(), io::Measurements{truth.h, truth.w, "mask.pbm", y});
  write_residuals(dir / "report.csv", rec.result.report);

  Json metrics;
  metrics["lambda"] = rec.lambda;
  metrics["kept_fraction"] = mask.kept_fraction();
  metrics["iterations"] = rec.result.report.iterations;
  metrics["objective"] = finite_or_null(rec.result.report.final_objective);
  metrics["converged"] = rec.result.report.converged;
  metrics["algorithm"] = rec.result.report.algorithm;
  metrics["psnr_zero_fill"] = finite_or_null(psnr(truth, zero_fill));
  metrics["psnr_recon"] = finite_or_null(psnr(truth, rec.result.image));
  metrics["tuning"] = rec.tuning;
  metrics["report"] = io::report_to_json(rec.result.report);
  if (a.reg.tv) {
    double tv_lambda = a.reg.lambda;
    Image tv;
    if (a.reg.tune) {
      const TuneResult t = tune_lambda(
          default_lambda_grid(),
          [&](double l) {
            return SolveResult{tv_reconstruct(model, y, l, a.reg.tol, a.reg.max_iter), Vec(), SolveReport{}};
          },
          truth);
      tv_lambda = t.lambda;
      tv = t.image;
    } else {
      tv = tv_reconstruct(model, y, tv_lambda, a.reg.tol, a.reg.max_iter);
    }
    write_image(dir, "tv", tv, a.reg.bits);
    metrics["tv_lambda"] = tv_lambda;
    metrics["psnr_tv"] = finite_or_null(psnr(truth, tv));
  }
  io::write_json((dir / "metrics.json").string(), metrics);
  write_resolved(dir, b, "mri");
  std::cout << "lambda=" << format_number(rec.lambda) << " iterations=" << rec.result.report.iterations
            << " psnr_zero_fill=" << format_number(psnr(truth, zero_fill))
            << " psnr_recon=" << format_number(psnr(truth, rec.result.image)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- selftest

struct SelftestArgs {
  Common common;
  std::string frame_file;
};

int cmd_selftest(const SelftestArgs& a, const Bindings& b) {
  SelftestOptions opts;
  opts.frame_file = a.frame_file;
  opts.seed = a.common.seed;
  bool passed = false;
  const Json report = run_selftest(opts, passed);
  const auto dir = prepare_out(a.common);
  io::write_json((dir / "metrics.json").string(), report);
  write_resolved(dir, b, "selftest");
  for (const Json& g : report["groups"]) {
    std::cout << (g["passed"].get<bool>() ? "PASS " : "FAIL ") << g["name"].get<std::string>();
    if (!g["passed"].get<bool>()) std::cout << ": " << g["detail"].get<std::string>();
    std::cout << '\n';
  }
  if (!passed) {
    std::cerr << "selftest failed:";
    for (const Json& g : report["groups"])
      if (!g["passed"].get<bool>()) std::cerr << ' ' << g["name"].get<std::string>();
    std::cerr << '\n';
  }
  return passed ? kOk : kSelftestFailed;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Polyhedral regularization toolkit"};
  app.require_subcommand(1);

  // norm
  CLI::App* norm = app.add_subcommand("norm", "polyhedral norm tools");
  norm->require_subcommand(1);
  NormArgs na;
  Bindings nb_eval, nb_reduce, nb_dualize, nb_witness;
  CLI::App* eval = norm->add_subcommand("eval", "evaluate a polyhedral norm");
  add_common(eval, nb_eval, na.common);
  nb_eval.add(eval, "--form", "form", na.form, "analysis, synthesis, weighted_l1 or zonotope")
      ->check(CLI::IsMember({"analysis", "synthesis", "weighted_l1", "zonotope"}));
  nb_eval.add(eval, "--matrix", "matrix", na.matrix, "d x N matrix (CSV or JSON); for weighted_l1 and zonotope "
                                                     "its columns are the rows of L");
  nb_eval.add(eval, "--x", "x", na.x, "comma-separated vector, repeatable");
  nb_eval.add(eval, "--x-file", "x_file", na.x_file, "matrix whose columns are vectors to evaluate");
  CLI::App* reduce = norm->add_subcommand("reduce", "drop atoms that are not extreme points");
  add_common(reduce, nb_reduce, na.common);
  nb_reduce.add(reduce, "--matrix", "matrix", na.matrix, "d x N dictionary");
  CLI::App* dualize = norm->add_subcommand("dualize", "facet vectors of a dictionary (d <= 3)");
  add_common(dualize, nb_dualize, na.common);
  nb_dualize.add(dualize, "--matrix", "matrix", na.matrix, "d x N dictionary");
  CLI::App* witness = norm->add_subcommand("witness", "the l1/linf witness matrix B_d");
  add_common(witness, nb_witness, na.common);
  nb_witness.add(witness, "--d", "d", na.d, "dimension");

  // approx
  ApproxArgs aa;
  Bindings ab;
  CLI::App* approx = app.add_subcommand("approx", "polytope approximation of an l_p ball");
  add_common(approx, ab, aa.common);
  ab.add(approx, "--d", "d", aa.d, "dimension (2 or 3)");
  ab.add(approx, "--n", "n", aa.n_list, "comma-separated numbers of vertex pairs");
  ab.add(approx, "--target", "target", aa.target, "l1, l2, linf or p");
  ab.add(approx, "--samples", "samples", aa.samples, "directions probed per n");

  // denoise
  DenoiseArgs da;
  Bindings db;
  CLI::App* denoise = app.add_subcommand("denoise", "Gaussian denoising");
  add_common(denoise, db, da.common);
  add_source(denoise, db, da.source);
  add_regularizer(denoise, db, da.reg);
  db.add(denoise, "--sigma", "sigma", da.sigma, "noise standard deviation");
  db.add_flag(denoise, "--noisy-input", "noisy_input", da.noisy_input, "--input is already noisy (no ground truth)");

  // mri
  MriArgs ma;
  Bindings mb;
  CLI::App* mri = app.add_subcommand("mri", "reconstruction from subsampled Fourier measurements");
  add_common(mri, mb, ma.common);
  add_source(mri, mb, ma.source);
  add_regularizer(mri, mb, ma.reg);
  mb.add(mri, "--mask", "mask", ma.mask, "random, radial, cartesian, or a PBM/JSON mask file");
  mb.add(mri, "--lines", "lines", ma.lines, "radial lines");
  mb.add(mri, "--density", "density", ma.density, "kept fraction for random and cartesian masks");
  mb.add(mri, "--sigma-c", "sigma_c", ma.sigma_c, "cartesian profile width (0 selects w/16)");
  mb.add(mri, "--noise", "noise", ma.noise, "standard deviation of measurement noise");

  // selftest
  SelftestArgs sa;
  Bindings sb;
  CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suite");
  add_common(selftest, sb, sa.common);
  sb.add(selftest, "--frame", "frame", sa.frame_file, "frame JSON to check in addition to the presets");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseError;
  }

  try {
    if (*eval) {
      finish_config(nb_eval, na.common);
      if (na.matrix.empty()) throw ParseError("norm eval: --matrix is required");
      return cmd_norm_eval(na, nb_eval);
    }
    if (*reduce) {
      finish_config(nb_reduce, na.common);
      if (na.matrix.empty()) throw ParseError("norm reduce: --matrix is required");
      const VertexDictionary V{io::read_matrix(na.matrix)};
      const VertexDictionary R = extreme_points(V);
      return write_matrix_result(na, nb_reduce, R.cols, "norm reduce",
                                 Json{{"input_columns", V.size()}, {"extreme_points", R.size()}});
    }
    if (*dualize) {
      finish_config(nb_dualize, na.common);
      if (na.matrix.empty()) throw ParseError("norm dualize: --matrix is required");
      const FacetMatrix F = facets_from_vertices(VertexDictionary{io::read_matrix(na.matrix)});
      return write_matrix_result(na, nb_dualize, F.cols, "norm dualize", Json{{"facets", F.size()}});
    }
    if (*witness) {
      finish_config(nb_witness, na.common);
      const auto [F, V] = l1_linf_witness(na.d);
      return write_matrix_result(na, nb_witness, F.cols, "norm witness", Json{{"d", na.d}});
    }
    if (*approx) {
      finish_config(ab, aa.common);
      return cmd_approx(aa, ab);
    }
    if (*denoise) {
      finish_config(db, da.common);
      return cmd_denoise(da, db);
    }
    if (*mri) {
      finish_config(mb, ma.common);
      return cmd_mri(ma, mb);
    }
    if (*selftest) {
      finish_config(sb, sa.common);
      return cmd_selftest(sa, sb);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPreconditionError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kSelftestFailed;
  }
  return kParseError;
}

}  // namespace polyreg::cli
