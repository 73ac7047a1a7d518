// io.hpp - CSV and JSON serialisation of traces, result tables and fits.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascadewg/experiments.hpp"
#include "json.hpp"

namespace cascadewg {

/// File-system failure; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceColumns[] = {"t_ns", "p_in_per_ns", "p_f_per_ns",
                                                "p_b_per_ns", "sum_rho_ee"};
inline constexpr const char* kSweepColumns[] = {"N",      "A1_over_pi", "P1_watts", "n_abs",
                                                "n_em_f", "n_em_b",     "eta_f",    "eta_b",
                                                "p_exc",  "tau_ns"};

/// Full-precision scientific notation, e.g. 1.00000000000000000e-02.
std::string format_double(double x);

std::string trace_csv(const Trace& trace);
nlohmann::json trace_json(const Trace& trace);

std::string sweep_csv(const ResultTable& table);
nlohmann::json sweep_json(const ResultTable& table);
nlohmann::json metadata_json(const TableMetadata& meta);
nlohmann::json observables_json(const ObservableSet& obs);

std::string fit_surface_csv(const BetaFitResult& fit);
nlohmann::json fit_json(const BetaFitResult& fit);

/// Rows with P1_watts and n_abs columns from a CSV with a header line.
/// Other columns are ignored, so a sweep CSV is accepted as it is.
std::vector<FitDataRow> read_fit_data(const std::filesystem::path& path);

/// Writes text to path, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cascadewg
