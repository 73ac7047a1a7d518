// experiments.hpp - scenario runners that turn a ScenarioConfig into traces,
// observable tables and beta-distribution fits.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascadewg/observables.hpp"
#include "cascadewg/scenario.hpp"

namespace cascadewg {

struct SweepRow {
  std::size_t n_atoms = 0;
  DrivePoint drive;
  ObservableSet obs;
};

/// Everything needed to reproduce a table row.
struct TableMetadata {
  std::string variant;  // "fluctuating", "no-fluctuation" or "linear-response"
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  BetaDistribution distribution;
  bool common_random_numbers = true;
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::string params_hash;
};

struct ResultTable {
  std::string name;  // file stem
  TableMetadata meta;
  std::vector<SweepRow> rows;
};

struct TimetraceRun {
  std::size_t n_atoms = 0;
  DrivePoint drive;
  Trace atoms;
  Trace reference;  // empty chain
  Trace linear;     // linear response over the same chains
  std::string label;
};

struct TimetraceResult {
  std::vector<TimetraceRun> runs;
  ResultTable table;  // rows only for n_atoms >= 1
};

struct AtomSweepResult {
  ResultTable fluctuating;
  std::optional<ResultTable> no_fluctuation;
  std::optional<ResultTable> linear;  // at the first drive point
};

struct BetaFitResult {
  std::vector<double> mean_grid;
  std::vector<double> sigma_grid;
  std::vector<double> sse;  // [mean index * sigma_grid.size() + sigma index]
  std::vector<FitDataRow> data;
  std::vector<double> model_at_best;
  double best_mean = 0.0;
  double best_sigma = 0.0;
  double best_sse = 0.0;
  /// The minimum is not bracketed by the grid, or the data carry no shape.
  bool degenerate = false;

  double surface(std::size_t i_mean, std::size_t i_sigma) const {
    return sse[i_mean * sigma_grid.size() + i_sigma];
  }
};

/// Seed used for drive point `index`: the base seed with common random
/// numbers, otherwise a distinct mix per point.
std::uint64_t point_seed(const ScenarioConfig& config, std::size_t index);

TimetraceResult run_timetrace(const ScenarioConfig& config, unsigned workers);
ResultTable run_power_sweep(const ScenarioConfig& config, unsigned workers);
AtomSweepResult run_atom_sweep(const ScenarioConfig& config, unsigned workers);
/// Every n_atoms x drive combination; traces are kept when write_traces is set.
ResultTable run_custom(const ScenarioConfig& config, unsigned workers,
                       std::vector<TimetraceRun>* traces = nullptr);

/// Model n_abs at the given powers for one (mean, sigma) cell.
std::vector<double> model_absorption(const ScenarioConfig& config, const BetaDistribution& dist,
                                     std::span<const double> power_watts, unsigned workers);

/// Sum of squared n_abs residuals over the (mean, sigma) grid of config.fit.
BetaFitResult fit_beta_distribution(const ScenarioConfig& config,
                                    std::span<const FitDataRow> data, unsigned workers);

/// Runs config.kind and writes all output files into config.output_dir.
/// Returns the written paths in creation order.
std::vector<std::filesystem::path> run_scenario(const ScenarioConfig& config, unsigned workers);

}  // namespace cascadewg
