// scenario.hpp - run configuration of the scenario runner, parsed from JSON
// with unknown keys rejected and every default made explicit.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascadewg/disorder.hpp"
#include "cascadewg/observables.hpp"
#include "json.hpp"

namespace cascadewg {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { timetrace, power_sweep, atom_sweep, beta_fit, custom };
enum class OutputFormat { csv, json };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& name);
std::string to_string(OutputFormat format);
OutputFormat format_from_string(const std::string& name);

/// Pulse drive given either as SI input power or as pulse area seen by an
/// atom of mean coupling. Exactly one list is non-empty.
struct DriveSpec {
  std::vector<double> power_watts;
  std::vector<double> area_over_pi;

  bool by_power() const { return !power_watts.empty(); }
  std::size_t size() const { return by_power() ? power_watts.size() : area_over_pi.size(); }
};

/// A drive point with both representations resolved.
struct DrivePoint {
  double area_over_pi = 0.0;
  double power_watts = 0.0;
  double peak_flux = 0.0;  // photons/ns
};

struct FitDataRow {
  double power_watts = 0.0;
  double n_abs = 0.0;
};

struct BetaFitSpec {
  std::vector<double> mean_grid;
  std::vector<double> sigma_grid;
  std::vector<FitDataRow> data;
  std::string data_file;  // CSV with P1_watts and n_abs columns
  std::optional<BetaDistribution> synthetic;  // generate data from the model instead
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::custom;
  double lifetime_ns = constants::cs_d2_lifetime_ns;
  double backward_ratio = constants::backward_ratio;
  double wavelength_nm = constants::cs_d2_wavelength_nm;
  double t_on = -5.0;
  double t_off = 0.0;
  double edge_time = 0.0;
  DriveSpec drive;
  std::vector<std::size_t> n_atoms;
  BetaDistribution distribution;
  std::size_t n_samples = 100;
  std::uint64_t seed = 0;
  bool common_random_numbers = true;
  double t_start = -5.0;
  double t_end = 100.0;
  double dt = 0.01;
  double fit_start = kDecayFitStart;  // decay fit window, ns after the pulse
  double fit_end = kDecayFitEnd;
  bool no_fluctuation_variant = true;
  bool linear_reference = true;
  bool write_traces = false;
  BetaFitSpec fit;
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::csv;

  /// Nominal parameters; beta_f is the distribution mean.
  PhysicalParams params() const;
  PulseShape pulse(double peak_flux) const;
  TimeGrid grid() const;
  /// Both representations of every drive value, converted with the mean coupling.
  std::vector<DrivePoint> drive_points() const;

  /// Throws ConfigError.
  void validate() const;
};

/// Scenario presets applied to keys the document leaves out.
ScenarioConfig default_config(ScenarioKind kind);

/// Parses a configuration document on top of the preset for `kind`. A
/// "scenario" key, when present, must agree with `kind`.
ScenarioConfig parse_config(const nlohmann::json& doc, ScenarioKind kind);
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioKind kind);

/// Fully resolved configuration; parse_config(to_json(c), c.kind) == c.
nlohmann::json to_json(const ScenarioConfig& config);

/// FNV-1a hash of the canonical resolved configuration, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace cascadewg
