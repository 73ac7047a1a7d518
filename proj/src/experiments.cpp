#include "cascadewg/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "cascadewg/io.hpp"
#include "cascadewg/oracles.hpp"

namespace cascadewg {

using nlohmann::json;

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

ChainConfig base_chain(const ScenarioConfig& c, double peak_flux) {
  return ChainConfig{c.params(), {}, c.pulse(peak_flux)};
}

MonteCarloSpec mc_spec(const ScenarioConfig& c, std::size_t n_atoms, const BetaDistribution& dist,
                       std::uint64_t seed, unsigned workers) {
  return MonteCarloSpec{n_atoms, dist, c.n_samples, seed, workers};
}

ObservableSet observe(const ScenarioConfig& c, const Trace& trace) {
  const PulseWindows w = PulseWindows::for_pulse(c.pulse(0.0), c.grid());
  return compute_observables(trace, w, c.fit_start, c.fit_end);
}

TableMetadata metadata(const ScenarioConfig& c, std::string variant,
                       const BetaDistribution& dist) {
  return TableMetadata{std::move(variant), c.seed,  c.n_samples, dist,
                       c.common_random_numbers, c.t_start, c.t_end, c.dt, config_hash(c)};
}

std::string drive_label(const ScenarioConfig& c, const DrivePoint& d) {
  char buf[64];
  if (c.drive.by_power()) {
    std::snprintf(buf, sizeof buf, "P%gW", d.power_watts);
  } else {
    std::snprintf(buf, sizeof buf, "A%gpi", d.area_over_pi);
  }
  return buf;
}

std::vector<TimetraceRun> trace_runs(const ScenarioConfig& c, unsigned workers,
                                     bool with_linear) {
  const TimeGrid grid = c.grid();
  const auto drives = c.drive_points();
  std::vector<TimetraceRun> runs;
  for (std::size_t n : c.n_atoms) {
    for (std::size_t j = 0; j < drives.size(); ++j) {
      TimetraceRun run;
      run.n_atoms = n;
      run.drive = drives[j];
      run.label = "N" + std::to_string(n) + "_" + drive_label(c, drives[j]);
      const ChainConfig base = base_chain(c, drives[j].peak_flux);
      const MonteCarloSpec spec = mc_spec(c, n, c.distribution, point_seed(c, j), workers);
      run.atoms = monte_carlo_average(base, grid, spec).front();
      run.reference = simulate(base, grid);
      if (with_linear) {
        run.linear = monte_carlo_average(base, spec, [&](const ChainConfig& cfg) {
                       return std::vector<Trace>{linear_response_simulate(cfg, grid)};
                     }).front();
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::string sweep_text(const ScenarioConfig& c, const ResultTable& t) {
  return c.format == OutputFormat::csv ? sweep_csv(t) : sweep_json(t).dump(1) + "\n";
}

std::string trace_text(const ScenarioConfig& c, const Trace& t) {
  return c.format == OutputFormat::csv ? trace_csv(t) : trace_json(t).dump(1) + "\n";
}

std::string extension(const ScenarioConfig& c) {
  return c.format == OutputFormat::csv ? ".csv" : ".json";
}

}  // namespace

std::uint64_t point_seed(const ScenarioConfig& config, std::size_t index) {
  return config.common_random_numbers ? config.seed : mix64(config.seed ^ mix64(index + 1));
}

TimetraceResult run_timetrace(const ScenarioConfig& c, unsigned workers) {
  c.validate();
  TimetraceResult out;
  out.runs = trace_runs(c, workers, c.linear_reference);
  out.table.name = "timetrace_observables";
  out.table.meta = metadata(c, "fluctuating", c.distribution);
  for (const TimetraceRun& r : out.runs) {
    if (r.n_atoms > 0) out.table.rows.push_back({r.n_atoms, r.drive, observe(c, r.atoms)});
  }
  return out;
}

ResultTable run_custom(const ScenarioConfig& c, unsigned workers,
                       std::vector<TimetraceRun>* traces) {
  c.validate();
  std::vector<TimetraceRun> runs = trace_runs(c, workers, c.linear_reference && traces);
  ResultTable table;
  table.name = "custom_sweep";
  table.meta = metadata(c, "fluctuating", c.distribution);
  for (const TimetraceRun& r : runs) table.rows.push_back({r.n_atoms, r.drive, observe(c, r.atoms)});
  if (traces) *traces = std::move(runs);
  return table;
}

ResultTable run_power_sweep(const ScenarioConfig& c, unsigned workers) {
  c.validate();
  ResultTable table = run_custom(c, workers);
  table.name = "power_sweep";
  return table;
}

AtomSweepResult run_atom_sweep(const ScenarioConfig& c, unsigned workers) {
  c.validate();
  const TimeGrid grid = c.grid();
  const auto drives = c.drive_points();
  const std::size_t n_max = *std::max_element(c.n_atoms.begin(), c.n_atoms.end());
  SimulationOptions options;
  options.prefixes = c.n_atoms;

  auto sweep = [&](const BetaDistribution& dist, std::string name, std::string variant) {
    ResultTable t;
    t.name = std::move(name);
    t.meta = metadata(c, std::move(variant), dist);
    for (std::size_t j = 0; j < drives.size(); ++j) {
      const ChainConfig base = base_chain(c, drives[j].peak_flux);
      const auto traces = monte_carlo_average(
          base, grid, mc_spec(c, n_max, dist, point_seed(c, j), workers), options);
      for (std::size_t k = 0; k < traces.size(); ++k) {
        t.rows.push_back({c.n_atoms[k], drives[j], observe(c, traces[k])});
      }
    }
    return t;
  };

  AtomSweepResult out;
  out.fluctuating = sweep(c.distribution, "atom_sweep", "fluctuating");
  if (c.no_fluctuation_variant) {
    out.no_fluctuation =
        sweep(BetaDistribution{c.distribution.mean, 0.0}, "atom_sweep_no_fluctuation",
              "no-fluctuation");
  }
  if (c.linear_reference) {
    ResultTable t;
    t.name = "atom_sweep_linear";
    t.meta = metadata(c, "linear-response", c.distribution);
    const ChainConfig base = base_chain(c, drives.front().peak_flux);
    const auto traces = monte_carlo_average(
        base, mc_spec(c, n_max, c.distribution, point_seed(c, 0), workers),
        [&](const ChainConfig& cfg) { return linear_response_prefixes(cfg, grid, c.n_atoms); });
    for (std::size_t k = 0; k < traces.size(); ++k) {
      t.rows.push_back({c.n_atoms[k], drives.front(), observe(c, traces[k])});
    }
    out.linear = std::move(t);
  }
  return out;
}

std::vector<double> model_absorption(const ScenarioConfig& c, const BetaDistribution& dist,
                                     std::span<const double> power_watts, unsigned workers) {
  const TimeGrid grid = c.grid();
  const PulseWindows w = PulseWindows::for_pulse(c.pulse(0.0), grid);
  ScenarioConfig cell = c;
  cell.distribution = dist;
  std::vector<double> out;
  for (std::size_t j = 0; j < power_watts.size(); ++j) {
    const double flux = power_to_flux(power_watts[j], cell.params());
    const Trace t = monte_carlo_average(base_chain(cell, flux), grid,
                                        mc_spec(c, c.n_atoms.front(), dist, point_seed(c, j),
                                                workers))
                        .front();
    out.push_back(absorbed_per_atom(t, w));
  }
  return out;
}

BetaFitResult fit_beta_distribution(const ScenarioConfig& c, std::span<const FitDataRow> data,
                                    unsigned workers) {
  if (data.size() < 5) throw ConfigError("beta-fit needs >= 5 data rows");
  BetaFitResult fit;
  fit.mean_grid = c.fit.mean_grid;
  fit.sigma_grid = c.fit.sigma_grid;
  fit.data.assign(data.begin(), data.end());
  std::vector<double> powers;
  for (const FitDataRow& r : data) powers.push_back(r.power_watts);

  fit.best_sse = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0, best_k = 0;
  for (std::size_t i = 0; i < fit.mean_grid.size(); ++i) {
    for (std::size_t k = 0; k < fit.sigma_grid.size(); ++k) {
      const BetaDistribution dist{fit.mean_grid[i], fit.sigma_grid[k]};
      const auto model = model_absorption(c, dist, powers, workers);
      double sse = 0.0;
      for (std::size_t r = 0; r < data.size(); ++r) {
        sse += (model[r] - data[r].n_abs) * (model[r] - data[r].n_abs);
      }
      fit.sse.push_back(sse);
      if (sse < fit.best_sse) {
        fit.best_sse = sse;
        best_i = i;
        best_k = k;
        fit.model_at_best = model;
      }
    }
  }
  fit.best_mean = fit.mean_grid[best_i];
  fit.best_sigma = fit.sigma_grid[best_k];

  auto on_edge = [](std::size_t idx, std::size_t n) { return n > 1 && (idx == 0 || idx + 1 == n); };
  const bool flat = std::all_of(data.begin(), data.end(),
                                [&](const FitDataRow& r) { return r.n_abs == data.front().n_abs; });
  fit.degenerate = flat || on_edge(best_i, fit.mean_grid.size()) ||
                   on_edge(best_k, fit.sigma_grid.size());
  return fit;
}

std::vector<std::filesystem::path> run_scenario(const ScenarioConfig& c, unsigned workers) {
  c.validate();
  const std::filesystem::path& dir = c.output_dir;
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& text) {
    write_text(dir / file, text);
    written.push_back(dir / file);
  };

  json summary;
  summary["config"] = to_json(c);
  summary["params_hash"] = config_hash(c);
  const std::string ext = extension(c);

  auto emit_traces = [&](const std::vector<TimetraceRun>& runs, const std::string& prefix) {
    json list = json::array();
    for (const TimetraceRun& r : runs) {
      const std::string stem = prefix + "_" + r.label;
      emit(stem + "_atoms" + ext, trace_text(c, r.atoms));
      emit(stem + "_reference" + ext, trace_text(c, r.reference));
      json entry = {{"label", r.label},
                    {"N", r.n_atoms},
                    {"A1_over_pi", r.drive.area_over_pi},
                    {"P1_watts", r.drive.power_watts},
                    {"atoms", stem + "_atoms" + ext},
                    {"reference", stem + "_reference" + ext}};
      if (!r.linear.times.empty()) {
        emit(stem + "_linear" + ext, trace_text(c, r.linear));
        entry["linear"] = stem + "_linear" + ext;
      }
      if (r.n_atoms > 0) entry["observables"] = observables_json(observe(c, r.atoms));
      list.push_back(entry);
    }
    return list;
  };

  auto emit_table = [&](const ResultTable& t) {
    emit(t.name + ext, sweep_text(c, t));
    json rows = json::array();
    for (const SweepRow& r : t.rows) {
      json o = observables_json(r.obs);
      o["N"] = r.n_atoms;
      o["A1_over_pi"] = r.drive.area_over_pi;
      o["P1_watts"] = r.drive.power_watts;
      rows.push_back(o);
    }
    summary["tables"][t.name] = {{"file", t.name + ext},
                                 {"metadata", metadata_json(t.meta)},
                                 {"rows", rows}};
  };

  std::string stem;
  switch (c.kind) {
    case ScenarioKind::timetrace: {
      stem = "timetrace";
      const TimetraceResult r = run_timetrace(c, workers);
      summary["traces"] = emit_traces(r.runs, "timetrace");
      emit_table(r.table);
      break;
    }
    case ScenarioKind::power_sweep:
      stem = "power_sweep";
      emit_table(run_power_sweep(c, workers));
      break;
    case ScenarioKind::atom_sweep: {
      stem = "atom_sweep";
      const AtomSweepResult r = run_atom_sweep(c, workers);
      emit_table(r.fluctuating);
      if (r.no_fluctuation) emit_table(*r.no_fluctuation);
      if (r.linear) emit_table(*r.linear);
      break;
    }
    case ScenarioKind::beta_fit: {
      stem = "beta_fit";
      std::vector<FitDataRow> data = c.fit.data;
      if (!c.fit.data_file.empty()) data = read_fit_data(c.fit.data_file);
      if (c.fit.synthetic) {
        std::vector<double> powers;
        for (const DrivePoint& d : c.drive_points()) powers.push_back(d.power_watts);
        const auto n_abs = model_absorption(c, *c.fit.synthetic, powers, workers);
        for (std::size_t i = 0; i < powers.size(); ++i) data.push_back({powers[i], n_abs[i]});
      }
      const BetaFitResult fit = fit_beta_distribution(c, data, workers);
      if (c.format == OutputFormat::csv) emit("beta_fit_surface.csv", fit_surface_csv(fit));
      summary["fit"] = fit_json(fit);
      break;
    }
    case ScenarioKind::custom: {
      stem = "custom";
      std::vector<TimetraceRun> runs;
      const ResultTable t = run_custom(c, workers, c.write_traces ? &runs : nullptr);
      if (c.write_traces) summary["traces"] = emit_traces(runs, "custom");
      emit_table(t);
      break;
    }
  }
  emit(stem + "_summary.json", summary.dump(1) + "\n");
  return written;
}

}  // namespace cascadewg
