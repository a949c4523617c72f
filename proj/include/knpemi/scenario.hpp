#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "knpemi/timeloop.hpp"

namespace knpemi {

/// A simulation plus what to record and where.
struct ScenarioConfig {
  std::string name = "custom";
  SimulationConfig sim;
  std::vector<Point2> probes;              // matched to the nearest membrane point
  int snapshot_every = 0;                  // steps; 0 disables snapshots
  std::filesystem::path output_dir = "out";
  int threads = 1;
  bool dump_matrices = false;
  long long clamp_limit = -1;              // < 0: clamps only counted; otherwise exceeding it aborts
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError when the simulation is invalid, a probe lies outside
/// the box or an output setting is negative.
void validate(const ScenarioConfig& cfg);

/// "model-a" (unit square, centred inclusion, passive membrane) or
/// "model-b" (idealized 2D axon with Hodgkin-Huxley membrane).
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Parses sectioned `key = value [unit]` text on top of `base`. Values are
/// converted to SI. Errors carry `source:line`.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>",
                            const ScenarioConfig& base = preset("model-a"));
ScenarioConfig parse_config_file(const std::filesystem::path& path, const ScenarioConfig& base = preset("model-a"));

/// Every setting in SI units with 17 significant digits; parse_config of
/// the result reproduces `cfg` exactly.
std::string format_config(const ScenarioConfig& cfg);

/// Value in SI for a number with an optional unit suffix of the given
/// dimension ("length", "time", "concentration", "voltage", ...).
double parse_quantity(const std::string& number, const std::string& unit, const std::string& dimension);

}  // namespace knpemi
