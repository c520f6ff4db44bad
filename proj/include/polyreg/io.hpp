#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "polyreg/frame.hpp"
#include "polyreg/geometry.hpp"
#include "polyreg/image.hpp"
#include "polyreg/models.hpp"
#include "polyreg/potential.hpp"
#include "polyreg/solvers.hpp"

namespace polyreg::io {

using Json = nlohmann::json;

// Images. PGM samples are mapped to [0, 1] by the file's maxval; writing
// clamps to [0, 1] and rounds. PFMG ("PFG h w\n" then little-endian float64,
// row-major) is lossless.
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& img, int bits = 8);
Image read_pfmg(const std::string& path);
void write_pfmg(const std::string& path, const Image& img);
/// Dispatches on the file magic ("P5" or "PFG").
Image read_image(const std::string& path);

// Masks: PBM (P4, bit set = kept) or JSON {"h", "w", "kept": [0/1 ...]}.
SamplingMask read_mask(const std::string& path);
void write_pbm(const std::string& path, const SamplingMask& mask);
void write_mask_json(const std::string& path, const SamplingMask& mask);

// Measurements: raw interleaved complex float64 plus a JSON sidecar
// `<path>.json` holding {"h", "w", "mask_file"}.
struct Measurements {
  int h = 0;
  int w = 0;
  std::string mask_file;
  Vec data;
};
void write_measurements(const std::string& path, const Measurements& m);
Measurements read_measurements(const std::string& path);

// Matrices: CSV with a "d,N" header followed by d rows of N values, or JSON
// {"d", "n", "data": [row-major]}. Chosen by the ".json" extension.
Mat read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Mat& m);
Mat matrix_from_json(const Json& j);
Json matrix_to_json(const Mat& m);

/// Parses "3,-4,1.5" into a vector.
Vec parse_vector(const std::string& text);

// Frame spec {"W", "U": [row-major], "zero_mean"}.
struct FrameSpec {
  Mat U;
  bool zero_mean = true;
};
FrameSpec frame_spec_from_json(const Json& j);
Json frame_spec_to_json(const FrameSpec& spec);
/// A preset name ("identity", "haar2", "dct3") or a path to a frame JSON.
FrameSpec resolve_frame(const std::string& name_or_path);

// Potential spec {"kind", "lambda": [...], "mu", "knots": [[[x...], [y...]] per channel]}.
SeparablePotential potential_from_json(const Json& j, int channels);
Json potential_to_json(const SeparablePotential& potential);

// Solver config {"algorithm", "tau", "tol", "max_iter", "momentum"}.
struct SolverConfig {
  std::string algorithm = "drs";
  double tau = 1.0;
  double tol = 1e-5;
  int max_iter = 5000;
  bool momentum = false;
};
SolverConfig solver_config_from_json(const Json& j);
Json solver_config_to_json(const SolverConfig& c);

Json report_to_json(const SolveReport& report);
Json equivalence_to_json(const NormEquivalenceReport& report);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

}  // namespace polyreg::io
