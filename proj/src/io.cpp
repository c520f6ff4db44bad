#include "polyreg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyreg/error.hpp"

namespace polyreg::io {
namespace {

static_assert(std::endian::native == std::endian::little, "raw float64 files assume a little-endian host");

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

// Reads the next whitespace separated header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) return tok;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(ch);
  }
  if (tok.empty()) throw ParseError("'" + path + "': truncated header");
  return tok;
}

int header_int(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("'" + path + "': expected a positive integer in the header, got '" + tok + "'");
  }
}

std::string magic_of(const std::string& path) {
  std::ifstream in = open_in(path);
  char buf[3] = {0, 0, 0};
  in.read(buf, 3);
  return std::string(buf, static_cast<std::size_t>(in.gcount()));
}

double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": cannot parse number '" + tok + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

void require_known_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + ": expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* known) { return k == known; })) {
      throw ParseError(what + ": unknown key '" + k + "'");
    }
  }
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in = open_in(path);
  if (header_token(in, path) != "P5") throw ParseError("'" + path + "' is not a binary PGM (P5) file");
  const int w = header_int(in, path);
  const int h = header_int(in, path);
  const int maxval = header_int(in, path);
  if (maxval > 65535) throw ParseError("'" + path + "': maxval above 65535");
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * w * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw ParseError("'" + path + "': truncated pixel data");
  Image img(h, w);
  for (Index p = 0; p < img.size(); ++p) {
    const std::size_t k = static_cast<std::size_t>(p) * bytes_per;
    const unsigned v = bytes_per == 1 ? raw[k] : (unsigned{raw[k]} << 8) | raw[k + 1];
    img.data[p] = static_cast<double>(v) / maxval;
  }
  return img;
}

void write_pgm(const std::string& path, const Image& img, int bits) {
  if (bits != 8 && bits != 16) throw PreconditionError("PGM output supports 8 or 16 bits");
  const int maxval = bits == 8 ? 255 : 65535;
  std::ofstream out = open_out(path);
  out << "P5\n" << img.w << ' ' << img.h << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(img.size()) * (bits / 8));
  for (Index p = 0; p < img.size(); ++p) {
    const double v = std::isfinite(img.data[p]) ? std::clamp(img.data[p], 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(v * maxval));
    if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Image read_pfmg(const std::string& path) {
  std::ifstream in = open_in(path);
  if (header_token(in, path) != "PFG") throw ParseError("'" + path + "' is not a PFMG file (missing 'PFG')");
  const int h = header_int(in, path);
  const int w = header_int(in, path);
  Image img(h, w);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(img.size() * sizeof(double))) {
    throw ParseError("'" + path + "': truncated PFMG data");
  }
  return img;
}

void write_pfmg(const std::string& path, const Image& img) {
  std::ofstream out = open_out(path);
  out << "PFG " << img.h << ' ' << img.w << '\n';
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.size() * sizeof(double)));
}

Image read_image(const std::string& path) {
  const std::string magic = magic_of(path);
  if (magic.rfind("P5", 0) == 0) return read_pgm(path);
  if (magic == "PFG") return read_pfmg(path);
  throw ParseError("'" + path + "': unknown image format (expected P5 PGM or PFMG)");
}

SamplingMask read_mask(const std::string& path) {
  SamplingMask mask;
  mask.kind = MaskKind::kCustom;
  if (magic_of(path).rfind("P4", 0) == 0) {
    std::ifstream in = open_in(path);
    header_token(in, path);
    mask.w = header_int(in, path);
    mask.h = header_int(in, path);
    const std::size_t row_bytes = (static_cast<std::size_t>(mask.w) + 7) / 8;
    std::vector<unsigned char> raw(row_bytes * mask.h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw ParseError("'" + path + "': truncated PBM data");
    mask.kept.assign(static_cast<std::size_t>(mask.h) * mask.w, 0);
    for (int i = 0; i < mask.h; ++i)
      for (int j = 0; j < mask.w; ++j)
        mask.kept[static_cast<std::size_t>(i) * mask.w + j] = (raw[i * row_bytes + j / 8] >> (7 - j % 8)) & 1;
    return mask;
  }
  const Json j = read_json(path);
  mask.h = get_or<int>(j, "h", 0);
  mask.w = get_or<int>(j, "w", 0);
  if (mask.h <= 0 || mask.w <= 0) throw ParseError("'" + path + "': mask needs positive h and w");
  const auto kept = get_or<std::vector<int>>(j, "kept", {});
  if (kept.size() != static_cast<std::size_t>(mask.h) * mask.w) {
    throw ParseError("'" + path + "': mask 'kept' must hold h*w entries");
  }
  for (int v : kept) mask.kept.push_back(v != 0 ? 1 : 0);
  return mask;
}

void write_pbm(const std::string& path, const SamplingMask& mask) {
  std::ofstream out = open_out(path);
  out << "P4\n" << mask.w << ' ' << mask.h << '\n';
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.w) + 7) / 8;
  std::vector<unsigned char> raw(row_bytes * mask.h, 0);
  for (int i = 0; i < mask.h; ++i)
    for (int j = 0; j < mask.w; ++j)
      if (mask.at(i, j)) raw[i * row_bytes + j / 8] |= static_cast<unsigned char>(1u << (7 - j % 8));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_mask_json(const std::string& path, const SamplingMask& mask) {
  Json j;
  j["h"] = mask.h;
  j["w"] = mask.w;
  j["kind"] = mask_kind_name(mask.kind);
  j["seed"] = mask.seed;
  std::vector<int> kept(mask.kept.begin(), mask.kept.end());
  j["kept"] = kept;
  write_json(path, j);
}

void write_measurements(const std::string& path, const Measurements& m) {
  if (m.data.size() % 2 != 0) throw DimensionError("measurements must hold interleaved (re, im) pairs");
  std::ofstream out = open_out(path);
  out.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  Json side;
  side["h"] = m.h;
  side["w"] = m.w;
  side["mask_file"] = m.mask_file;
  write_json(path + ".json", side);
}

Measurements read_measurements(const std::string& path) {
  Measurements m;
  const Json side = read_json(path + ".json");
  m.h = get_or<int>(side, "h", 0);
  m.w = get_or<int>(side, "w", 0);
  m.mask_file = get_or<std::string>(side, "mask_file", "");
  const auto bytes = std::filesystem::file_size(path);
  if (bytes % (2 * sizeof(double)) != 0) throw ParseError("'" + path + "': size is not a whole number of complex float64");
  m.data.resize(static_cast<Index>(bytes / sizeof(double)));
  std::ifstream in = open_in(path);
  in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(bytes));
  return m;
}

Mat matrix_from_json(const Json& j) {
  const int d = get_or<int>(j, "d", -1);
  const int n = get_or<int>(j, "n", -1);
  if (d <= 0 || n <= 0) throw ParseError("matrix JSON needs positive 'd' and 'n'");
  const auto data = get_or<std::vector<double>>(j, "data", {});
  if (data.size() != static_cast<std::size_t>(d) * n) throw ParseError("matrix JSON: 'data' must hold d*n entries");
  Mat m(d, n);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = data[static_cast<std::size_t>(r) * n + c];
  return m;
}

Json matrix_to_json(const Mat& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"d", m.rows()}, {"n", m.cols()}, {"data", data}};
}

Mat read_matrix(const std::string& path) {
  if (ends_with(path, ".json")) return matrix_from_json(read_json(path));
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "': empty matrix file");
  const auto head = split(line, ',');
  if (head.size() != 2) throw ParseError("'" + path + "': header must be 'd,N'");
  const double d_val = parse_double(head[0], path);
  const double n_val = parse_double(head[1], path);
  const int d = static_cast<int>(d_val);
  const int n = static_cast<int>(n_val);
  if (d <= 0 || n <= 0 || d != d_val || n != n_val) throw ParseError("'" + path + "': header must be 'd,N' with positive integers");
  Mat m(d, n);
  int r = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (r >= d) throw ParseError("'" + path + "': more than d rows");
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != n) {
      throw ParseError("'" + path + "': row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                       " values, expected " + std::to_string(n));
    }
    for (int c = 0; c < n; ++c) m(r, c) = parse_double(cells[c], path);
    ++r;
  }
  if (r != d) throw ParseError("'" + path + "': expected " + std::to_string(d) + " rows, found " + std::to_string(r));
  return m;
}

void write_matrix(const std::string& path, const Mat& m) {
  if (ends_with(path, ".json")) {
    write_json(path, matrix_to_json(m));
    return;
  }
  std::ofstream out = open_out(path);
  out.precision(17);
  out << m.rows() << ',' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

Vec parse_vector(const std::string& text) {
  const auto cells = split(text, ',');
  if (cells.empty()) throw ParseError("empty vector");
  Vec v(static_cast<Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Index>(i)] = parse_double(cells[i], "vector");
  return v;
}

FrameSpec frame_spec_from_json(const Json& j) {
  require_known_keys(j, {"W", "U", "zero_mean"}, "frame spec");
  const int W = get_or<int>(j, "W", 0);
  if (W <= 0) throw ParseError("frame spec needs a positive 'W'");
  const auto data = get_or<std::vector<double>>(j, "U", {});
  const std::size_t n = static_cast<std::size_t>(W) * W;
  if (data.size() != n * n) throw ParseError("frame spec: 'U' must hold (W^2)^2 entries");
  FrameSpec spec;
  spec.U.resize(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) spec.U(static_cast<Index>(r), static_cast<Index>(c)) = data[r * n + c];
  spec.zero_mean = get_or<bool>(j, "zero_mean", true);
  return spec;
}

Json frame_spec_to_json(const FrameSpec& spec) {
  const int W = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.U.rows()))));
  return Json{{"W", W}, {"U", matrix_to_json(spec.U)["data"]}, {"zero_mean", spec.zero_mean}};
}

FrameSpec resolve_frame(const std::string& name_or_path) {
  if (name_or_path == "identity" || name_or_path == "haar2" || name_or_path == "dct3") {
    return FrameSpec{frame_preset(name_or_path), true};
  }
  return frame_spec_from_json(read_json(name_or_path));
}

SeparablePotential potential_from_json(const Json& j, int channels) {
  require_known_keys(j, {"kind", "lambda", "mu", "knots"}, "potential spec");
  const std::string kind = get_or<std::string>(j, "kind", "weighted_l1");
  Vec lambda = Vec::Ones(channels);
  if (j.contains("lambda")) {
    const Json& l = j.at("lambda");
    if (l.is_number()) {
      lambda.setConstant(l.get<double>());
    } else {
      const auto v = get_or<std::vector<double>>(j, "lambda", {});
      if (static_cast<int>(v.size()) != channels) {
        throw DimensionError("potential spec: 'lambda' has " + std::to_string(v.size()) + " entries, frame has " +
                             std::to_string(channels) + " channels");
      }
      lambda = Eigen::Map<const Vec>(v.data(), channels);
    }
  }
  if (kind == "weighted_l1") return SeparablePotential::weighted_l1(lambda);
  if (kind == "huber") return SeparablePotential::huber(lambda, get_or<double>(j, "mu", 1e-2));
  if (kind == "tabulated") {
    if (!j.contains("knots") || !j.at("knots").is_array()) throw ParseError("tabulated potential needs 'knots'");
    std::vector<KnotTable> tables;
    for (const Json& ch : j.at("knots")) {
      if (!ch.is_array() || ch.size() != 2) throw ParseError("each knots entry must be [[x...], [y...]]");
      try {
        tables.push_back(KnotTable{ch[0].get<std::vector<double>>(), ch[1].get<std::vector<double>>()});
      } catch (const Json::exception& e) {
        throw ParseError(std::string("knots: ") + e.what());
      }
    }
    if (tables.size() == 1 && channels > 1) tables.resize(static_cast<std::size_t>(channels), tables.front());
    if (static_cast<int>(tables.size()) != channels) {
      throw DimensionError("potential spec: " + std::to_string(tables.size()) + " knot tables for " +
                           std::to_string(channels) + " channels");
    }
    return SeparablePotential::tabulated(std::move(tables), lambda);
  }
  throw ParseError("unknown potential kind '" + kind + "'");
}

Json potential_to_json(const SeparablePotential& p) {
  Json j;
  j["kind"] = p.kind_name();
  j["lambda"] = std::vector<double>(p.lambda().data(), p.lambda().data() + p.lambda().size());
  if (p.kind() == PotentialKind::kHuber) j["mu"] = p.mu();
  if (p.kind() == PotentialKind::kTabulated) {
    Json knots = Json::array();
    for (const KnotTable& t : p.tables()) knots.push_back(Json::array({t.x, t.y}));
    j["knots"] = knots;
  }
  return j;
}

SolverConfig solver_config_from_json(const Json& j) {
  require_known_keys(j, {"algorithm", "tau", "tol", "max_iter", "momentum"}, "solver config");
  SolverConfig c;
  c.algorithm = get_or<std::string>(j, "algorithm", c.algorithm);
  c.tau = get_or<double>(j, "tau", c.tau);
  c.tol = get_or<double>(j, "tol", c.tol);
  c.max_iter = get_or<int>(j, "max_iter", c.max_iter);
  c.momentum = get_or<bool>(j, "momentum", c.momentum);
  return c;
}

Json solver_config_to_json(const SolverConfig& c) {
  return Json{{"algorithm", c.algorithm}, {"tau", c.tau}, {"tol", c.tol}, {"max_iter", c.max_iter}, {"momentum", c.momentum}};
}

namespace {
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
}  // namespace

Json report_to_json(const SolveReport& r) {
  Json j;
  j["algorithm"] = r.algorithm;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_objective"] = number_or_null(r.final_objective);
  j["optimality_residual"] = number_or_null(r.optimality_residual);
  j["duality_gap"] = number_or_null(r.duality_gap);
  j["tau"] = r.tau;
  j["rho"] = r.rho;
  j["residual_history"] = r.residual_history;
  return j;
}

Json equivalence_to_json(const NormEquivalenceReport& r) {
  return Json{{"c0", r.c0}, {"C0", r.C0}, {"epsilon", r.epsilon}, {"n_samples", r.n_samples}};
}

Json read_json(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path + "': invalid JSON (" + e.what() + ")");
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace polyreg::io
