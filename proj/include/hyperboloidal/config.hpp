#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hyperboloidal/pipeline.hpp"
#include "hyperboloidal/presets.hpp"

namespace hyp {

/// A value of the TOML subset: string, boolean, number, or an array of numbers or strings.
using ConfigValue = std::variant<std::string, bool, double, std::vector<double>, std::vector<std::string>>;

/// section -> key -> value. Keys outside any section live in section "".
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

/// Parses the subset: [section] headers, key = value lines, # comments, basic "..." strings,
/// true/false, decimal numbers, and single-line arrays. Throws ConfigError with the line number.
ConfigTable parse_toml(const std::string& text);

struct RunConfig {
  // [grid]
  GridMode grid_mode = GridMode::radial1d;
  int n = 257;
  std::vector<int> resolutions{129, 257, 513};

  // [free_data]
  PresetParams preset;

  // [pipeline], [solver]
  PipelineMode mode = PipelineMode::shearfree;
  PipelineOptions pipeline;

  // [checks]
  double residual_tolerance = 1e-8;
  double trace_tolerance = 1e-11;
  double cmc_tolerance = 1e-11;
  bool shear_check = true;
  double shear_tolerance = 0.0;  ///< 0 selects bc_constant · h²
  double fault_epsilon = 1e-3;
  double fault_min_residual = 1e-4;
  std::vector<double> probe_epsilons;

  // [convergence]
  std::vector<std::string> problems{"manufactured-lichnerowicz"};
  double min_rate = 1.8;
  double max_rate = 0.0;  ///< 0 disables the upper bound

  // [output]
  bool write_json = true;
  bool write_csv = true;
  bool write_vtk = false;
};

/// Builds a run configuration from a parsed table; unknown sections or keys, wrong value
/// types, and out-of-range values throw ConfigError.
RunConfig config_from_table(const ConfigTable& table);

/// Reads and parses a config file.
RunConfig load_config(const std::string& path);

/// Preset names, grid mode and pipeline mode are mutually compatible, and the ν̄ preset has
/// the decay class required by the pipeline mode, measured with weighted_sup_norm on a grid of
/// the configured size. Throws ConfigError.
void validate_config(const RunConfig& cfg);

std::string to_string(GridMode m);
GridMode parse_grid_mode(const std::string& s);

}  // namespace hyp
