#pragma once

#include "lensopt/gradient.hpp"
#include "lensopt/optimizer.hpp"
#include "lensopt/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lensopt {

/// Malformed or invalid scenario file. The message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Disk (center, radius) or axis-aligned rectangle [min, max].
struct Region {
  enum class Kind { disk, rectangle };
  Kind kind = Kind::disk;
  Eigen::Vector2d center{0.5, 0.5};
  Scalar radius = 0.25;
  Eigen::Vector2d min{0.25, 0.25};
  Eigen::Vector2d max{0.75, 0.75};

  /// Negative inside, positive outside (exact for the disk, the usual box
  /// distance for the rectangle).
  Scalar signed_distance(Scalar x, Scalar y) const;
  bool inside_box(Scalar lx, Scalar ly) const;
};

/// A phase field: constant, or `inside` on a region and `outside` elsewhere
/// with an optional linear transition of the given width.
struct PhaseSpec {
  bool constant = true;
  Scalar value = 1.0;
  Region region;
  Scalar inside = 0.0;
  Scalar outside = 1.0;
  Scalar width = 0.0;
};

Vector rasterize(const Grid& grid, const PhaseSpec& spec);
Vector rasterize_indicator(const Grid& grid, const Region& region);

struct PulseSpec {
  std::vector<Side> edges{Side::left};
  Scalar amplitude = 0.5;
  std::string profile = "sin2";  // "sin2": A sin^2(pi t / duration) on [0, duration]; "sine": A sin(omega t)
  Scalar duration = 0.25;
  Scalar omega = 10.0;
  std::string shape = "uniform";  // "uniform" or "gaussian" along each edge
  Scalar center = 0.5;            // gaussian centre, as a fraction of the edge length
  Scalar spread = 0.15;           // gaussian width, same units

  Scalar time_factor(Scalar t) const;
};

struct AlphaSpec {
  std::string kind = "constant";  // or "modulated"
  Scalar value = 1.0;
  Scalar amplitude = 0.0;
  Scalar omega = 1.0;
};

struct InitialSpec {
  Scalar amplitude = 0.0;  // gaussian bump in u0, zero velocity
  Eigen::Vector2d center{0.5, 0.5};
  Scalar spread = 0.1;
};

struct TargetSpec {
  std::string mode = "synthesize";  // "synthesize", "file" or "zero"
  std::string prefix;               // file mode: `<prefix>_<step>.vtk`
  PhaseSpec phi_true{false, 1.0, {}, 0.0, 1.0, 0.0};
};

struct SweepSpec {
  std::vector<Scalar> eps{0.08, 0.04, 0.02};
  bool warm_start = true;
};

struct ProfileSpec {
  std::vector<Scalar> eps{0.1, 0.05};
  int nodes = 2000;
  Scalar length = 1.0;
};

struct GradCheckSpec {
  int probes = 3;
  std::vector<Scalar> deltas{1e-3, 1e-4, 1e-5};
};

struct OutputSpec {
  std::string directory = "out";
  int snapshot_stride = 1;
};

/// Validated run description. Every field has a default; see README for the
/// file schema.
struct Scenario {
  int nx = 32;
  int ny = 32;
  Scalar lx = 1.0;
  Scalar ly = 1.0;
  Scalar final_time = 1.0;
  Scalar time_step = 1.0 / 64;
  MediumParams medium;
  GLParams gl;
  PotentialQuadrature quadrature = PotentialQuadrature::consistent;
  AlphaSpec alpha;
  PulseSpec source;
  InitialSpec initial;
  Region focus{Region::Kind::disk, {0.8, 0.5}, 0.12, {}, {}};
  TargetSpec target;
  PhaseSpec initial_phase;
  OptimizerConfig optimizer;
  StateOptions solver;
  SweepSpec sweep;
  ProfileSpec profile;
  GradCheckSpec grad_check;
  OutputSpec output;

  int steps() const;
  /// Throws ConfigError naming the violated key.
  void validate() const;
};

/// Parse and validate. `origin` prefixes error messages; a relative target
/// prefix is resolved against `base_dir` when one is given.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<config>",
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON of the scenario with all defaults filled in.
std::string scenario_json(const Scenario& sc);

/// Uniform refinement: nx, ny times `scale`, time step divided by `scale`.
Scenario refined(const Scenario& sc, int scale);

Grid scenario_grid(const Scenario& sc);
TimeGrid scenario_time(const Scenario& sc);
AlphaCoefficient scenario_alpha(const Scenario& sc);
SourceSpec scenario_source(const Scenario& sc, const Grid& grid, const TimeGrid& time);

/// Assemble the optimization problem. In synthesize mode the target is the
/// forward solution at phi_true on the same discretization.
Problem build_problem(const Scenario& sc);

}  // namespace lensopt
