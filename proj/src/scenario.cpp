#include "cascadewg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace cascadewg {

using nlohmann::json;

namespace {

constexpr std::pair<ScenarioKind, const char*> kScenarioNames[] = {
    {ScenarioKind::timetrace, "timetrace"},   {ScenarioKind::power_sweep, "power-sweep"},
    {ScenarioKind::atom_sweep, "atom-sweep"}, {ScenarioKind::beta_fit, "beta-fit"},
    {ScenarioKind::custom, "custom"},
};

// Reads the members of one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) out = as_number(*v, path(key));
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = get(key)) out = as_count(*v, path(key));
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) throw ConfigError(path(key) + " must be an array of numbers");
      out.clear();
      for (const json& x : *v) out.push_back(as_number(x, path(key)));
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + path(it.key()));
    }
  }

  std::string path(const std::string& key) const {
    return where_.empty() ? "'" + key + "'" : "'" + where_ + "." + key + "'";
  }

  static double as_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
    return x;
  }

  static std::size_t as_count(const json& v, const std::string& what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(what + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<double> default_area_sweep() {
  std::vector<double> a{0.01, 0.02, 0.03, 0.05, 0.07, 0.1};
  for (int k = 3; k <= 40; ++k) a.push_back(k * 0.05);
  return a;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

bool on_grid(const TimeGrid& grid, double t) {
  try {
    grid.index_of(t);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& [k, name] : kScenarioNames) {
    if (k == kind) return name;
  }
  return "custom";
}

ScenarioKind scenario_from_string(const std::string& name) {
  for (const auto& [k, n] : kScenarioNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

OutputFormat format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + name + "'");
}

PhysicalParams ScenarioConfig::params() const {
  PhysicalParams p;
  p.gamma_total = 1.0 / lifetime_ns;
  p.beta_f = distribution.mean;
  p.beta_b = backward_ratio * distribution.mean;
  p.wavelength_nm = wavelength_nm;
  return p;
}

PulseShape ScenarioConfig::pulse(double peak_flux) const {
  PulseShape s;
  s.peak_flux = peak_flux;
  s.t_on = t_on;
  s.t_off = t_off;
  s.edge_time = edge_time;
  return s;
}

TimeGrid ScenarioConfig::grid() const { return TimeGrid(t_start, t_end, dt); }

std::vector<DrivePoint> ScenarioConfig::drive_points() const {
  const PhysicalParams p = params();
  const double duration = t_off - t_on;
  std::vector<DrivePoint> out;
  if (drive.by_power()) {
    for (double w : drive.power_watts) {
      const double flux = power_to_flux(w, p);
      const double area = rabi_frequency(flux, p.beta_f, p.gamma_total) * duration;
      out.push_back({area / std::numbers::pi, w, flux});
    }
  } else {
    for (double a : drive.area_over_pi) {
      const double flux = flux_for_pulse_area(a * std::numbers::pi, duration, p.beta_f,
                                              p.gamma_total);
      out.push_back({a, flux_to_power(flux, p), flux});
    }
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (!(lifetime_ns > 0.0)) throw ConfigError("physics.lifetime_ns must be positive");
  if (!(backward_ratio >= 0.0)) throw ConfigError("physics.backward_ratio must be >= 0");
  if (!(wavelength_nm > 0.0)) throw ConfigError("physics.wavelength_nm must be positive");
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("grid.dt_ns must be positive");
  if (!(fit_start < fit_end)) throw ConfigError("decay_fit window is empty");
  try {
    distribution.validate();
    params().validate();
    pulse(0.0).validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (t_start > t_on || t_off + fit_end > t_end) {
    throw ConfigError("grid must span the pulse and the decay-fit window");
  }
  const double steps = (t_end - t_start) / dt;
  if (steps > 1e8) throw ConfigError("grid has more than 1e8 steps");
  TimeGrid g;
  try {
    g = grid();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  for (double t : {t_on, t_off, t_off + fit_start, t_off + fit_end}) {
    if (!on_grid(g, t)) throw ConfigError("pulse edges and fit window must be grid points");
  }

  if (n_atoms.empty()) throw ConfigError("n_atoms must not be empty");
  if (kind != ScenarioKind::timetrace &&
      std::find(n_atoms.begin(), n_atoms.end(), 0u) != n_atoms.end()) {
    throw ConfigError("per-atom observables need n_atoms >= 1");
  }
  if (std::set(n_atoms.begin(), n_atoms.end()).size() != n_atoms.size()) {
    throw ConfigError("n_atoms entries must be distinct");
  }

  const bool need_drive = kind != ScenarioKind::beta_fit || fit.synthetic.has_value();
  if (!drive.power_watts.empty() && !drive.area_over_pi.empty()) {
    throw ConfigError("give the drive either as power_watts or as area_over_pi, not both");
  }
  if (need_drive && drive.size() == 0) throw ConfigError("drive list must not be empty");
  const auto& values = drive.by_power() ? drive.power_watts : drive.area_over_pi;
  for (double v : values) {
    if (!(v >= 0.0)) throw ConfigError("drive values must be >= 0");
  }
  if (std::set(values.begin(), values.end()).size() != values.size()) {
    throw ConfigError("drive values must be distinct");
  }

  if (kind == ScenarioKind::beta_fit) {
    if (n_atoms.size() != 1) throw ConfigError("beta-fit takes a single n_atoms value");
    if (fit.mean_grid.empty() || fit.sigma_grid.empty()) {
      throw ConfigError("fit grids must not be empty");
    }
    if (!strictly_increasing(fit.mean_grid) || !strictly_increasing(fit.sigma_grid)) {
      throw ConfigError("fit grids must be strictly increasing");
    }
    if (!(fit.mean_grid.front() > 0.0) || fit.sigma_grid.front() < 0.0) {
      throw ConfigError("fit grids need mean > 0 and sigma >= 0");
    }
    const int sources = !fit.data.empty() + !fit.data_file.empty() + fit.synthetic.has_value();
    if (sources != 1) {
      throw ConfigError("beta-fit needs exactly one of fit.data, fit.data_file, fit.synthetic");
    }
    if (fit.synthetic) {
      try {
        fit.synthetic->validate();
      } catch (const DomainError& e) {
        throw ConfigError(std::string("fit.synthetic: ") + e.what());
      }
    }
    const std::size_t rows = fit.synthetic ? drive.size() : fit.data.size();
    if (fit.data_file.empty() && rows < 5) throw ConfigError("beta-fit needs >= 5 data rows");
    for (const FitDataRow& r : fit.data) {
      if (!(r.power_watts >= 0.0)) throw ConfigError("fit.data power must be >= 0");
    }
  }
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  switch (kind) {
    case ScenarioKind::timetrace:
      c.n_atoms = {300};
      c.drive.power_watts = {20e-12, 30e-9, 60e-9};
      break;
    case ScenarioKind::power_sweep:
      c.n_atoms = {300};
      c.drive.area_over_pi = default_area_sweep();
      break;
    case ScenarioKind::atom_sweep:
      c.n_atoms = {1, 10, 25, 50, 75, 100, 150, 200, 250, 300, 400, 500, 600, 700, 800, 900, 1000};
      c.drive.area_over_pi = {0.03, 0.5, 0.7, 0.9, 1.0, 1.3};
      break;
    case ScenarioKind::beta_fit:
      c.n_atoms = {300};
      c.fit.mean_grid = {0.0088, 0.0098, 0.0108, 0.0118, 0.0128};
      c.fit.sigma_grid = {0.0045, 0.0055, 0.0065, 0.0075, 0.0085};
      break;
    case ScenarioKind::custom:
      break;
  }
  return c;
}

ScenarioConfig parse_config(const json& doc, ScenarioKind kind) {
  ScenarioConfig c = default_config(kind);
  ObjectReader top(doc, "");

  if (const json* v = top.get("scenario")) {
    if (!v->is_string() || scenario_from_string(v->get<std::string>()) != kind) {
      throw ConfigError("config scenario does not match the requested scenario '" +
                        to_string(kind) + "'");
    }
  }
  if (const json* v = top.get("physics")) {
    ObjectReader r(*v, "physics");
    r.number("lifetime_ns", c.lifetime_ns);
    r.number("backward_ratio", c.backward_ratio);
    r.number("wavelength_nm", c.wavelength_nm);
    r.finish();
  }
  if (const json* v = top.get("pulse")) {
    ObjectReader r(*v, "pulse");
    r.number("t_on_ns", c.t_on);
    r.number("t_off_ns", c.t_off);
    r.number("edge_ns", c.edge_time);
    r.finish();
  }
  if (const json* v = top.get("drive")) {
    ObjectReader r(*v, "drive");
    if (r.has("power_watts") && r.has("area_over_pi")) {
      throw ConfigError("give the drive either as power_watts or as area_over_pi, not both");
    }
    if (r.has("power_watts")) {
      c.drive.area_over_pi.clear();
      r.numbers("power_watts", c.drive.power_watts);
    } else if (r.has("area_over_pi")) {
      c.drive.power_watts.clear();
      r.numbers("area_over_pi", c.drive.area_over_pi);
    }
    r.finish();
  }
  if (const json* v = top.get("n_atoms")) {
    c.n_atoms.clear();
    if (v->is_array()) {
      for (const json& x : *v) c.n_atoms.push_back(ObjectReader::as_count(x, "'n_atoms'"));
    } else {
      c.n_atoms.push_back(ObjectReader::as_count(*v, "'n_atoms'"));
    }
  }
  if (const json* v = top.get("beta")) {
    ObjectReader r(*v, "beta");
    r.number("mean", c.distribution.mean);
    r.number("sigma", c.distribution.sigma);
    r.finish();
  }
  top.count("n_samples", c.n_samples);
  if (const json* v = top.get("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      throw ConfigError("'seed' must be an unsigned 64-bit integer");
    }
    c.seed = v->get<std::uint64_t>();
  }
  top.flag("common_random_numbers", c.common_random_numbers);
  if (const json* v = top.get("grid")) {
    ObjectReader r(*v, "grid");
    r.number("t_start_ns", c.t_start);
    r.number("t_end_ns", c.t_end);
    r.number("dt_ns", c.dt);
    r.finish();
  }
  if (const json* v = top.get("decay_fit")) {
    ObjectReader r(*v, "decay_fit");
    r.number("start_ns", c.fit_start);
    r.number("end_ns", c.fit_end);
    r.finish();
  }
  top.flag("no_fluctuation_variant", c.no_fluctuation_variant);
  top.flag("linear_reference", c.linear_reference);
  top.flag("write_traces", c.write_traces);
  if (const json* v = top.get("fit")) {
    ObjectReader r(*v, "fit");
    r.numbers("mean_grid", c.fit.mean_grid);
    r.numbers("sigma_grid", c.fit.sigma_grid);
    if (const json* d = r.get("data")) {
      if (!d->is_array()) throw ConfigError("'fit.data' must be an array");
      for (const json& row : *d) {
        ObjectReader rr(row, "fit.data[]");
        FitDataRow fr;
        if (!rr.has("P1_watts") || !rr.has("n_abs")) {
          throw ConfigError("fit.data rows need P1_watts and n_abs");
        }
        rr.number("P1_watts", fr.power_watts);
        rr.number("n_abs", fr.n_abs);
        rr.finish();
        c.fit.data.push_back(fr);
      }
    }
    if (const json* d = r.get("data_file")) {
      if (!d->is_string()) throw ConfigError("'fit.data_file' must be a string");
      c.fit.data_file = d->get<std::string>();
    }
    if (const json* d = r.get("synthetic")) {
      ObjectReader rs(*d, "fit.synthetic");
      BetaDistribution b;
      rs.number("mean", b.mean);
      rs.number("sigma", b.sigma);
      rs.finish();
      c.fit.synthetic = b;
    }
    r.finish();
  }
  if (const json* v = top.get("output")) {
    ObjectReader r(*v, "output");
    if (const json* d = r.get("dir")) {
      if (!d->is_string()) throw ConfigError("'output.dir' must be a string");
      c.output_dir = d->get<std::string>();
    }
    if (const json* d = r.get("format")) {
      if (!d->is_string()) throw ConfigError("'output.format' must be a string");
      c.format = format_from_string(d->get<std::string>());
    }
    r.finish();
  }
  top.finish();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  ScenarioConfig c = parse_config(doc, kind);
  if (!c.fit.data_file.empty() && std::filesystem::path(c.fit.data_file).is_relative()) {
    c.fit.data_file = (path.parent_path() / c.fit.data_file).lexically_normal().string();
  }
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.kind);
  j["physics"] = {{"lifetime_ns", c.lifetime_ns},
                  {"backward_ratio", c.backward_ratio},
                  {"wavelength_nm", c.wavelength_nm}};
  j["pulse"] = {{"t_on_ns", c.t_on}, {"t_off_ns", c.t_off}, {"edge_ns", c.edge_time}};
  if (c.drive.by_power()) {
    j["drive"] = {{"power_watts", c.drive.power_watts}};
  } else {
    j["drive"] = {{"area_over_pi", c.drive.area_over_pi}};
  }
  j["n_atoms"] = c.n_atoms;
  j["beta"] = {{"mean", c.distribution.mean}, {"sigma", c.distribution.sigma}};
  j["n_samples"] = c.n_samples;
  j["seed"] = c.seed;
  j["common_random_numbers"] = c.common_random_numbers;
  j["grid"] = {{"t_start_ns", c.t_start}, {"t_end_ns", c.t_end}, {"dt_ns", c.dt}};
  j["decay_fit"] = {{"start_ns", c.fit_start}, {"end_ns", c.fit_end}};
  j["no_fluctuation_variant"] = c.no_fluctuation_variant;
  j["linear_reference"] = c.linear_reference;
  j["write_traces"] = c.write_traces;
  if (c.kind == ScenarioKind::beta_fit) {
    json f;
    f["mean_grid"] = c.fit.mean_grid;
    f["sigma_grid"] = c.fit.sigma_grid;
    if (!c.fit.data.empty()) {
      f["data"] = json::array();
      for (const FitDataRow& r : c.fit.data) {
        f["data"].push_back({{"P1_watts", r.power_watts}, {"n_abs", r.n_abs}});
      }
    }
    if (!c.fit.data_file.empty()) f["data_file"] = c.fit.data_file;
    if (c.fit.synthetic) {
      f["synthetic"] = {{"mean", c.fit.synthetic->mean}, {"sigma", c.fit.synthetic->sigma}};
    }
    j["fit"] = f;
  }
  j["output"] = {{"dir", c.output_dir.generic_string()}, {"format", to_string(c.format)}};
  return j;
}

std::string config_hash(const ScenarioConfig& config) {
  json j = to_json(config);
  // Where the files go does not change what is in them.
  j.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cascadewg
