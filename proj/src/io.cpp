#include "cascadewg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cascadewg {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

std::string trace_csv(const Trace& t) {
  std::string out = "t_ns,p_in_per_ns,p_f_per_ns,p_b_per_ns,sum_rho_ee\n";
  out.reserve(out.size() + t.size() * 5 * 25);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_double(t.times[i]);
    for (double v : {t.p_in[i], t.p_f[i], t.p_b[i], t.sum_rho_ee[i]}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

json trace_json(const Trace& t) {
  json j;
  j["columns"] = kTraceColumns;
  j["n_atoms"] = t.n_atoms;
  j["t_ns"] = t.times;
  j["p_in_per_ns"] = t.p_in;
  j["p_f_per_ns"] = t.p_f;
  j["p_b_per_ns"] = t.p_b;
  j["sum_rho_ee"] = t.sum_rho_ee;
  return j;
}

std::string sweep_csv(const ResultTable& table) {
  std::string out = "N,A1_over_pi,P1_watts,n_abs,n_em_f,n_em_b,eta_f,eta_b,p_exc,tau_ns\n";
  for (const SweepRow& r : table.rows) {
    out += std::to_string(r.n_atoms);
    const ObservableSet& o = r.obs;
    for (double v : {r.drive.area_over_pi, r.drive.power_watts, o.n_abs, o.n_em_f, o.n_em_b,
                     o.eta_f, o.eta_b, o.p_exc, o.tau_decay.value_or(NAN)}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

json observables_json(const ObservableSet& o) {
  return {{"n_abs", o.n_abs},
          {"n_em_f", o.n_em_f},
          {"n_em_b", o.n_em_b},
          {"n_em_b_during_pulse", o.n_em_b_pulse},
          {"eta_f", o.eta_f},
          {"eta_b", o.eta_b},
          {"p_exc", o.p_exc},
          {"tau_ns", o.tau_decay ? json(*o.tau_decay) : json(nullptr)},
          {"ill_conditioned", o.ill_conditioned}};
}

json metadata_json(const TableMetadata& m) {
  return {{"variant", m.variant},
          {"seed", m.seed},
          {"n_samples", m.n_samples},
          {"beta", {{"mean", m.distribution.mean}, {"sigma", m.distribution.sigma}}},
          {"common_random_numbers", m.common_random_numbers},
          {"grid", {{"t_start_ns", m.t_start}, {"t_end_ns", m.t_end}, {"dt_ns", m.dt}}},
          {"params_hash", m.params_hash}};
}

json sweep_json(const ResultTable& table) {
  json j;
  j["name"] = table.name;
  j["metadata"] = metadata_json(table.meta);
  j["columns"] = kSweepColumns;
  j["rows"] = json::array();
  for (const SweepRow& r : table.rows) {
    const ObservableSet& o = r.obs;
    j["rows"].push_back({r.n_atoms, r.drive.area_over_pi, r.drive.power_watts, o.n_abs, o.n_em_f,
                         o.n_em_b, o.eta_f, o.eta_b, o.p_exc,
                         number_or_null(o.tau_decay.value_or(NAN))});
  }
  return j;
}

std::string fit_surface_csv(const BetaFitResult& fit) {
  std::string out = "beta_mean,beta_sigma,sse\n";
  for (std::size_t i = 0; i < fit.mean_grid.size(); ++i) {
    for (std::size_t k = 0; k < fit.sigma_grid.size(); ++k) {
      out += format_double(fit.mean_grid[i]) + ',' + format_double(fit.sigma_grid[k]) + ',' +
             format_double(fit.surface(i, k)) + '\n';
    }
  }
  return out;
}

json fit_json(const BetaFitResult& fit) {
  json j;
  j["best"] = {{"beta_mean", fit.best_mean}, {"beta_sigma", fit.best_sigma}, {"sse", fit.best_sse}};
  j["degenerate_fit"] = fit.degenerate;
  j["mean_grid"] = fit.mean_grid;
  j["sigma_grid"] = fit.sigma_grid;
  j["sse"] = fit.sse;
  j["data"] = json::array();
  for (std::size_t i = 0; i < fit.data.size(); ++i) {
    j["data"].push_back({{"P1_watts", fit.data[i].power_watts},
                         {"n_abs", fit.data[i].n_abs},
                         {"model_n_abs", fit.model_at_best[i]}});
  }
  return j;
}

std::vector<FitDataRow> read_fit_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty data file");
  const auto header = split_csv_line(line);
  std::size_t ip = header.size(), ia = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "P1_watts") ip = i;
    if (header[i] == "n_abs") ia = i;
  }
  if (ip == header.size() || ia == header.size()) {
    throw ConfigError(path.string() + ": header needs P1_watts and n_abs columns");
  }
  std::vector<FitDataRow> rows;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    try {
      if (cells.size() != header.size()) throw std::invalid_argument("column count");
      std::size_t used = 0;
      FitDataRow r;
      r.power_watts = std::stod(cells[ip], &used);
      if (used != cells[ip].size()) throw std::invalid_argument("P1_watts");
      r.n_abs = std::stod(cells[ia], &used);
      if (used != cells[ia].size()) throw std::invalid_argument("n_abs");
      rows.push_back(r);
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace cascadewg
