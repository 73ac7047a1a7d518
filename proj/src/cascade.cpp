#include "cascadewg/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cascadewg {

namespace {

std::string describe(double t, std::size_t atom, const std::string& what) {
  std::ostringstream os;
  os << what << " at t = " << t << " ns";
  if (atom != IntegrationError::npos) os << ", atom " << atom;
  return os.str();
}

std::int64_t as_step_count(double t, double dt, const char* name) {
  const double k = t / dt;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(k))) {
    throw DomainError(std::string("time grid ") + name + " must be an integer multiple of dt");
  }
  return static_cast<std::int64_t>(r);
}

constexpr double kSignTolerance = 1e-9;

}  // namespace

IntegrationError::IntegrationError(double time_ns, std::size_t atom_index,
                                   const std::string& reason)
    : std::runtime_error(describe(time_ns, atom_index, reason)),
      time_ns_(time_ns),
      atom_index_(atom_index),
      reason_(reason) {}

TimeGrid::TimeGrid(double t_start, double t_end, double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time grid dt must be positive");
  if (!(t_start < t_end)) throw DomainError("time grid requires t_start < t_end");
  first_ = as_step_count(t_start, dt, "start");
  last_ = as_step_count(t_end, dt, "end");
}

std::size_t TimeGrid::index_of(double t) const {
  const std::int64_t k = as_step_count(t, dt_, "sample");
  if (k < first_ || k > last_) throw DomainError("time outside of the grid");
  return static_cast<std::size_t>(k - first_);
}

TimeGrid TimeGrid::refined(int factor) const {
  if (factor < 1) throw DomainError("refinement factor must be >= 1");
  return TimeGrid(t_start(), t_end(), dt_ / factor);
}

double ChainConfig::backward_ratio() const {
  return params.beta_f > 0.0 ? params.beta_b / params.beta_f : 0.0;
}

void ChainConfig::validate() const {
  params.validate();
  pulse.validate();
  for (std::size_t k = 0; k < beta_f.size(); ++k) {
    if (!(beta_f[k] >= 0.0 && beta_f[k] <= 1.0)) {
      throw DomainError("beta_f of atom " + std::to_string(k) + " outside [0, 1]");
    }
  }
}

ChainConfig ChainConfig::uniform(const PhysicalParams& params, std::size_t n,
                                 const PulseShape& pulse) {
  return ChainConfig{params, std::vector<double>(n, params.beta_f), pulse};
}

CascadeOutput field_sweep(std::span<const AtomState> states, FieldAmplitude alpha_in,
                          std::span<const double> beta_f, double gamma) {
  if (states.size() != beta_f.size()) throw DomainError("field_sweep: length mismatch");
  CascadeOutput out;
  out.alpha.resize(states.size());
  complex alpha = alpha_in.value;
  for (std::size_t k = 0; k < states.size(); ++k) {
    out.alpha[k] = alpha;
    alpha -= complex(0.0, std::sqrt(beta_f[k] * gamma)) * states[k].rho_ge;
  }
  out.alpha_out = alpha;
  return out;
}

namespace {

// Structure-of-arrays view of the chain state.
struct ChainArrays {
  std::vector<double> ee, cr, ci;

  explicit ChainArrays(std::size_t n = 0) : ee(n), cr(n), ci(n) {}
};

constexpr std::size_t kScanLanes = 4;

// Exclusive prefix sums alpha_k = a_in - i sum_{j<k} g_j rho_ge,j. The chain
// is cut into kScanLanes contiguous segments accumulated side by side, then
// stitched together with the running segment totals.
void drive_scan(std::size_t n, complex a_in, const double* __restrict g,
                const double* __restrict cr, const double* __restrict ci,
                double* __restrict ar, double* __restrict ai) {
  const std::size_t seg = (n + kScanLanes - 1) / kScanLanes;
  double run_re[kScanLanes] = {};
  double run_im[kScanLanes] = {};
  const std::size_t last_lane_start = (kScanLanes - 1) * seg;
  const std::size_t full = n > last_lane_start ? n - last_lane_start : 0;
  // Every lane is populated for j < full.
  for (std::size_t j = 0; j < full; ++j) {
    for (std::size_t lane = 0; lane < kScanLanes; ++lane) {
      const std::size_t k = lane * seg + j;
      ar[k] = run_re[lane];
      ai[k] = run_im[lane];
      run_re[lane] += g[k] * ci[k];
      run_im[lane] -= g[k] * cr[k];
    }
  }
  for (std::size_t j = full; j < seg; ++j) {
    for (std::size_t lane = 0; lane < kScanLanes; ++lane) {
      const std::size_t k = lane * seg + j;
      if (k >= n) continue;
      ar[k] = run_re[lane];
      ai[k] = run_im[lane];
      run_re[lane] += g[k] * ci[k];
      run_im[lane] -= g[k] * cr[k];
    }
  }
  double off_re = a_in.real();
  double off_im = a_in.imag();
  for (std::size_t lane = 0; lane < kScanLanes; ++lane) {
    const std::size_t lo = std::min(n, lane * seg);
    const std::size_t hi = std::min(n, lo + seg);
    for (std::size_t k = lo; k < hi; ++k) {
      ar[k] += off_re;
      ai[k] += off_im;
    }
    off_re += run_re[lane];
    off_im += run_im[lane];
  }
}

// bloch_rhs on the SoA layout, with Omega_k = 2 g_k alpha_k.
void bloch_rates(std::size_t n, double gamma, const double* __restrict g,
                 const double* __restrict ar, const double* __restrict ai,
                 const double* __restrict ee, const double* __restrict cr,
                 const double* __restrict ci, double* __restrict dee,
                 double* __restrict dcr, double* __restrict dci) {
  for (std::size_t k = 0; k < n; ++k) {
    const double om_re = 2.0 * g[k] * ar[k];
    const double om_im = 2.0 * g[k] * ai[k];
    const double inversion = 1.0 - 2.0 * ee[k];
    dee[k] = -(om_re * ci[k] - om_im * cr[k]) - gamma * ee[k];
    dcr[k] = 0.5 * om_im * inversion - 0.5 * gamma * cr[k];
    dci[k] = -0.5 * om_re * inversion - 0.5 * gamma * ci[k];
  }
}

// out = base + h * rate, and acc = keep * acc + w * rate.
void axpy_stage(std::size_t n, double h, double w, double keep, const double* __restrict base,
                const double* __restrict rate, double* __restrict out,
                double* __restrict acc) {
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = base[k] + h * rate[k];
    acc[k] = keep * acc[k] + w * rate[k];
  }
}

// y += w * (acc + rate)
void rk4_finish(std::size_t n, double w, const double* __restrict acc,
                const double* __restrict rate, double* __restrict y) {
  for (std::size_t k = 0; k < n; ++k) y[k] += w * (acc[k] + rate[k]);
}

// Fixed-step RK4 for the whole chain. Each stage first builds every atom's
// drive from the stage state and then evaluates the Bloch rates of all atoms.
class ChainIntegrator {
 public:
  explicit ChainIntegrator(const ChainConfig& config)
      : gamma_(config.params.gamma_total),
        n_(config.n_atoms()),
        y_(n_),
        stage_(n_),
        acc_(n_),
        rate_(n_),
        alpha_re_(n_),
        alpha_im_(n_),
        coupling_(n_) {
    for (std::size_t k = 0; k < n_; ++k) coupling_[k] = std::sqrt(config.beta_f[k] * gamma_);
  }

  std::span<const double> coupling() const { return coupling_; }
  const ChainArrays& state() const { return y_; }

  void step(double h, complex a_start, complex a_mid, complex a_end) {
    rates(y_, a_start);
    stage(0.5 * h, 1.0, 0.0);
    rates(stage_, a_mid);
    stage(0.5 * h, 2.0, 1.0);
    rates(stage_, a_mid);
    stage(h, 2.0, 1.0);
    rates(stage_, a_end);
    const double w = h / 6.0;
    rk4_finish(n_, w, acc_.ee.data(), rate_.ee.data(), y_.ee.data());
    rk4_finish(n_, w, acc_.cr.data(), rate_.cr.data(), y_.cr.data());
    rk4_finish(n_, w, acc_.ci.data(), rate_.ci.data(), y_.ci.data());
  }

 private:
  void rates(const ChainArrays& s, complex a_in) {
    drive_scan(n_, a_in, coupling_.data(), s.cr.data(), s.ci.data(), alpha_re_.data(),
               alpha_im_.data());
    bloch_rates(n_, gamma_, coupling_.data(), alpha_re_.data(), alpha_im_.data(), s.ee.data(),
                s.cr.data(), s.ci.data(), rate_.ee.data(), rate_.cr.data(), rate_.ci.data());
  }

  void stage(double h, double w, double keep) {
    axpy_stage(n_, h, w, keep, y_.ee.data(), rate_.ee.data(), stage_.ee.data(), acc_.ee.data());
    axpy_stage(n_, h, w, keep, y_.cr.data(), rate_.cr.data(), stage_.cr.data(), acc_.cr.data());
    axpy_stage(n_, h, w, keep, y_.ci.data(), rate_.ci.data(), stage_.ci.data(), acc_.ci.data());
  }

  double gamma_;
  std::size_t n_;
  ChainArrays y_, stage_, acc_, rate_;
  std::vector<double> alpha_re_, alpha_im_;
  std::vector<double> coupling_;
};

struct PrefixSlot {
  std::size_t length;
  std::size_t trace_index;
};

Trace make_trace(const TimeGrid& grid, std::size_t n_atoms, Diagnostics per_atom) {
  Trace tr;
  const std::size_t m = grid.size();
  tr.n_atoms = n_atoms;
  tr.times.resize(m);
  for (std::size_t i = 0; i < m; ++i) tr.times[i] = grid.time(i);
  tr.p_in.resize(m);
  tr.p_f.resize(m);
  tr.p_b.resize(m);
  tr.sum_rho_ee.resize(m);
  tr.p_coherent.resize(m);
  if (per_atom != Diagnostics::none) tr.per_atom_rho_ee.resize(m * n_atoms);
  if (per_atom == Diagnostics::full) {
    tr.per_atom_rho_ge.resize(m * n_atoms);
    tr.per_atom_alpha.resize(m * n_atoms);
  }
  return tr;
}

void check_atoms(double t, const ChainArrays& atoms) {
  for (std::size_t k = 0; k < atoms.ee.size(); ++k) {
    const AtomState s{atoms.ee[k], complex(atoms.cr[k], atoms.ci[k])};
    if (!s.is_physical()) throw IntegrationError(t, k, "density matrix left the physical domain");
  }
}

// Evaluates the forward and backward output powers on the current state and
// stores sample i into every prefix trace.
void observe(std::size_t i, double t, double input_flux, const ChainArrays& atoms,
             const ChainConfig& config, std::span<const double> coupling,
             const std::vector<PrefixSlot>& slots, std::vector<Trace>& traces,
             Diagnostics per_atom, bool check) {
  const double gamma = config.params.gamma_total;
  const double ratio_b = config.backward_ratio();
  const double* ee = atoms.ee.data();
  const double* cr = atoms.cr.data();
  const double* ci = atoms.ci.data();
  const double* beta = config.beta_f.data();
  double a_re = std::sqrt(input_flux);
  double a_im = 0.0;
  double forward_gain = 0.0;
  double emitted = 0.0;  // sum_k beta_f,k Gamma rho_ee,k
  double sum_ee = 0.0;
  bool violated = false;
  std::size_t slot = 0;

  auto record = [&](std::size_t length) {
    for (; slot < slots.size() && slots[slot].length == length; ++slot) {
      Trace& tr = traces[slots[slot].trace_index];
      tr.p_in[i] = input_flux;
      tr.p_f[i] = input_flux + forward_gain;
      tr.p_b[i] = ratio_b * emitted;
      tr.sum_rho_ee[i] = sum_ee;
      tr.p_coherent[i] = a_re * a_re + a_im * a_im;
      if (check && tr.p_f[i] < -kSignTolerance) {
        throw IntegrationError(t, length == 0 ? IntegrationError::npos : length - 1,
                               "negative forward power");
      }
    }
  };

  record(0);
  std::size_t next = slot < slots.size() ? slots[slot].length : 0;
  for (std::size_t k = 0; k < atoms.ee.size(); ++k) {
    const double g = coupling[k];
    const double rho = ee[k];
    violated |= !(rho >= -AtomState::positivity_tolerance &&
                  cr[k] * cr[k] + ci[k] * ci[k] <=
                      rho * (1.0 - rho) + AtomState::positivity_tolerance);
    if (per_atom != Diagnostics::none) {
      for (const PrefixSlot& ps : slots) {
        if (k >= ps.length) continue;
        Trace& tr = traces[ps.trace_index];
        const std::size_t at = i * tr.n_atoms + k;
        tr.per_atom_rho_ee[at] = rho;
        if (per_atom == Diagnostics::full) {
          tr.per_atom_rho_ge[at] = complex(cr[k], ci[k]);
          tr.per_atom_alpha[at] = complex(a_re, a_im);
        }
      }
    }
    // beta_f Gamma rho_ee + 2 sqrt(beta_f Gamma) Im(alpha^* rho_ge)
    const double im = a_re * ci[k] - a_im * cr[k];
    forward_gain += beta[k] * gamma * rho + 2.0 * g * im;
    emitted += beta[k] * gamma * rho;
    sum_ee += rho;
    a_re += g * ci[k];
    a_im -= g * cr[k];
    if (k + 1 == next) {
      record(next);
      next = slot < slots.size() ? slots[slot].length : 0;
    }
  }
  if (check && violated) check_atoms(t, atoms);
}

}  // namespace

std::vector<Trace> simulate_prefixes(const ChainConfig& config, const TimeGrid& grid,
                                     const SimulationOptions& options) {
  config.validate();
  const std::size_t n = config.n_atoms();
  std::vector<std::size_t> lengths = options.prefixes;
  if (lengths.empty()) lengths.push_back(n);

  std::vector<Trace> traces;
  std::vector<PrefixSlot> slots;
  std::size_t longest = 0;
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    if (lengths[j] > n) throw DomainError("prefix length exceeds the chain length");
    traces.push_back(make_trace(grid, lengths[j], options.per_atom));
    slots.push_back({lengths[j], j});
    longest = std::max(longest, lengths[j]);
  }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const PrefixSlot& a, const PrefixSlot& b) { return a.length < b.length; });

  // Atoms beyond the longest requested prefix cannot influence it.
  ChainConfig active = config;
  active.beta_f.resize(longest);
  ChainIntegrator integrator(active);

  const PulseShape& pulse = config.pulse;
  const double h = grid.dt();
  auto sample = [&](std::size_t i) {
    const double t = grid.time(i);
    const double right = pulse.flux(t);
    const double left = pulse.flux_left(t);
    if (i > 0 && left != right) {
      observe(i, t, left, integrator.state(), active, integrator.coupling(), slots, traces,
              Diagnostics::none, options.check_invariants);
      for (Trace& tr : traces) {
        tr.edges.push_back(EdgeSample{i, tr.p_in[i], tr.p_f[i], tr.p_coherent[i]});
      }
    }
    observe(i, t, right, integrator.state(), active, integrator.coupling(), slots, traces,
            options.per_atom, options.check_invariants);
  };

  sample(0);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double t0 = grid.time(i);
    const double t1 = grid.time(i + 1);
    integrator.step(h, pulse.amplitude(t0).value, pulse.amplitude(t0 + 0.5 * h).value,
                    pulse.amplitude_left(t1).value);
    sample(i + 1);
  }
  return traces;
}

Trace simulate(const ChainConfig& config, const TimeGrid& grid, const SimulationOptions& options) {
  SimulationOptions full = options;
  full.prefixes = {config.n_atoms()};
  return std::move(simulate_prefixes(config, grid, full).front());
}

EnergyBalance energy_ledger(const Trace& trace, const ChainConfig& config, const TimeGrid& grid) {
  const std::size_t m = trace.size();
  const std::size_t n = trace.n_atoms;
  if (n > 0 && !trace.has_per_atom()) {
    throw DomainError("energy_ledger needs a trace with per-atom diagnostics");
  }
  if (m < 3 || m != grid.size()) throw DomainError("energy_ledger: trace does not match grid");
  const double gamma = config.params.gamma_total;
  const double h = grid.dt();
  const PulseShape& pulse = config.pulse;

  auto kink = [&](double t) {
    return pulse.edge_time == 0.0 && (t == pulse.t_on || t == pulse.t_off);
  };
  const std::vector<double>& s = trace.sum_rho_ee;

  EnergyBalance out;
  out.residual.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double derivative;
    if (i == 0 || kink(trace.times[i])) {
      if (i + 2 >= m) throw DomainError("energy_ledger: pulse edge too close to the grid end");
      derivative = (-3.0 * s[i] + 4.0 * s[i + 1] - s[i + 2]) / (2.0 * h);
    } else if (i == m - 1) {
      derivative = (3.0 * s[i] - 4.0 * s[i - 1] + s[i - 2]) / (2.0 * h);
    } else {
      derivative = (s[i + 1] - s[i - 1]) / (2.0 * h);
    }
    double lost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      lost += (1.0 - config.beta_f[k]) * gamma * trace.rho_ee(i, k);
    }
    const double r = trace.p_in[i] - trace.p_f[i] - lost - derivative;
    out.residual[i] = r;
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
    out.peak_flux = std::max(out.peak_flux, trace.p_in[i]);
  }
  return out;
}

}  // namespace cascadewg
