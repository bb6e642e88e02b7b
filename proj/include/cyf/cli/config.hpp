#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyf/continuation.hpp"
#include "cyf/elliptic.hpp"
#include "cyf/flow.hpp"

namespace cyf::cli {

enum class Mode { Flow, Newton, Sweep, Bisect, Probe, Diagnose };

std::string_view to_string(Mode mode);

struct HarmonicTerm {
  double amplitude = 0.0;
  std::vector<int> wave;  // one integer per grid axis
  double phase = 0.0;

  bool operator==(const HarmonicTerm&) const = default;
};

/// Recipe for a scalar field on the run grid.
///   constant:  value
///   harmonic:  offset + sum amplitude * cos(2 pi wave.x + phase)
///   random:    harmonic sum with seeded amplitudes in [-amplitude, amplitude],
///              phases in [0, 2 pi) and every wave vector with |k|_inf <= max_wave
///   file:      CYF1 snapshot, path relative to the config file
/// When shift_max is set the sampled field is shifted so that its maximum equals it.
struct FieldSpec {
  enum class Kind { Constant, Harmonic, Random, File };
  Kind kind = Kind::Constant;
  double value = 0.0;
  double offset = 0.0;
  std::vector<HarmonicTerm> terms;
  double amplitude = 0.0;
  int max_wave = 0;
  std::filesystem::path path;
  std::optional<double> shift_max;

  bool operator==(const FieldSpec&) const = default;
};

struct ThetaSpec {
  std::optional<FieldSpec> stream;     // 2-D only
  std::vector<FieldSpec> components;  // one per axis

  bool operator==(const ThetaSpec&) const = default;
};

struct RunConfig {
  Mode mode = Mode::Flow;
  std::vector<int> grid;
  int n = 2;
  FieldSpec s0;
  std::optional<ThetaSpec> theta;
  std::optional<FieldSpec> g;
  std::optional<FieldSpec> g0;
  std::optional<double> lambda;
  std::vector<double> lambdas;     // sweep
  std::optional<FieldSpec> initial;  // start for flow / newton, field under test for diagnose
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  bool save_fields = true;
  NewtonParams newton;
  FlowParams flow;
  ContinuationParams continuation;
};

/// Throws Error(ParseError) for unreadable or malformed JSON and
/// Error(ValidationError) with the offending key path otherwise.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Canonical, fully-defaulted form of a config; used for snapshots and echoed
/// into every run directory.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Seed of the field in `slot` (splitmix64 of seed and slot), so that fields
/// drawn from one config seed are independent.
std::uint64_t field_seed(std::uint64_t seed, std::uint64_t slot);

ScalarField sample(const FieldSpec& spec, const Grid& grid, std::uint64_t seed);

Background make_background(const RunConfig& config);

}  // namespace cyf::cli
