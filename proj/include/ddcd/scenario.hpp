#pragma once

// Scenario configuration: a JSON document with sections geometry, inertia,
// time, loads, constitutive, weights, solver, output and an optional dcnlp
// section for the data-set refinement study. Node and element numbers in the
// document are 1-based. See docs/config.md for the schema.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddcd/dynamics.hpp"

namespace ddcd {

struct GeometrySpec {
  enum class Kind { Arc, Straight };
  Kind kind = Kind::Arc;
  double radius = 0.0;      // arc
  double sweep_deg = 90.0;  // arc
  double length = 0.0;      // straight
  int nodes = 0;
};

struct ConstitutiveSpec {
  enum class Source { Law, DataFile };
  Source source = Source::Law;
  bool has_law = false;
  ConstitutiveLaw law;
  double quadratic_factor = 0.0;  // as given in the document
  std::string data_path;          // resolved against the config directory
  DcnlpMode mode = DcnlpMode::Shared;
};

struct SolverSpec {
  NewtonOptions newton;
  double constraint_tolerance = 1e-10;
};

/// Reference values a run is compared against (summary only).
struct ReferenceValues {
  int node = 0;  // 1-based
  std::optional<Vec3> position;
  std::optional<Vec3> d1, d2, d3;
  std::optional<Vec3> linear_momentum;
  std::optional<Vec3> angular_momentum;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<int> elements;  // 1-based, element CSV; empty selects the middle element
  std::optional<ReferenceValues> reference;
};

/// Data-set refinement study: for each grid spacing, data points are taken
/// from the scenario law on a regular grid over `box` and the exact problem
/// is compared with the approximate one over `steps` time steps.
struct DcnlpStudySpec {
  DcnlpMode mode = DcnlpMode::Shared;
  StrainBox box;
  std::vector<double> spacings;
  int steps = 1;
};

struct Scenario {
  std::string name = "scenario";
  GeometrySpec geometry;
  Inertia inertia;
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  LoadCase loads;
  ConstitutiveSpec constitutive;
  Vec6 weight_diagonal = Vec6::Ones();
  SolverSpec solver;
  OutputSpec output;
  std::optional<DcnlpStudySpec> dcnlp;

  BeamMesh build_mesh() const;
  TimeGrid grid() const;
  ElementWeights weights() const;
  /// Loads the data file for data-set materials.
  MaterialModel material() const;
  /// Arc radius when the mirror-symmetry functional applies (quarter arc).
  std::optional<double> symmetry_radius() const;
};

/// Every problem found in a scenario; empty means valid.
std::vector<std::string> validate(const Scenario& scenario);

/// Parses and validates. Relative data paths are resolved against
/// `base_dir`. Throws ValidationError listing every problem found.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// JSON text that parse_scenario maps back to an equal scenario.
std::string to_json(const Scenario& scenario);

/// Bundled scenarios "ex1" (linear law), "ex2" (explicit quadratic) and "ex3"
/// (implicit quadratic). Throws InvalidInput for other names.
Scenario preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ddcd
