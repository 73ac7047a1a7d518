// cascade.hpp - propagation of a coherent probe through a chirally coupled
// atom chain. Each atom is driven only by the coherent field leaving its
// upstream neighbour; all atoms are integrated on a shared uniform grid.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascadewg/physics.hpp"

namespace cascadewg {

/// Raised when the integrated state leaves the physical domain.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double time_ns, std::size_t atom_index, const std::string& reason);

  double time_ns() const { return time_ns_; }
  const std::string& reason() const { return reason_; }
  /// Zero-based atom index, or npos when the violation is not atom-specific.
  std::size_t atom_index() const { return atom_index_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double time_ns_;
  std::size_t atom_index_;
  std::string reason_;
};

/// Uniform grid t_k = k dt for k in [first, last]. Both ends must be integer
/// multiples of dt, so t = 0 is a grid point whenever it lies in range.
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(-5.0, 100.0, 0.005) {}
  TimeGrid(double t_start, double t_end, double dt);

  double t_start() const { return time(0); }
  double t_end() const { return time(steps()); }
  double dt() const { return dt_; }
  std::size_t steps() const { return static_cast<std::size_t>(last_ - first_); }
  std::size_t size() const { return steps() + 1; }
  double time(std::size_t i) const {
    return static_cast<double>(first_ + static_cast<std::int64_t>(i)) * dt_;
  }
  /// Index of the sample at time t; throws DomainError when t is off-grid.
  std::size_t index_of(double t) const;
  /// The same span at step dt / factor.
  TimeGrid refined(int factor) const;

 private:
  std::int64_t first_;
  std::int64_t last_;
  double dt_;
};

struct ChainConfig {
  PhysicalParams params;
  std::vector<double> beta_f;  // per atom, index 0 receives the probe
  PulseShape pulse;

  std::size_t n_atoms() const { return beta_f.size(); }
  /// beta_b,k / beta_f,k, taken from params (beta_b scales with each atom's beta_f).
  double backward_ratio() const;
  void validate() const;

  /// Chain of n identical atoms with coupling params.beta_f.
  static ChainConfig uniform(const PhysicalParams& params, std::size_t n, const PulseShape& pulse);
};

/// Left limits of the output columns at a sample where the input flux jumps
/// (the edges of an ideal rectangular pulse). The trace columns themselves
/// hold right limits.
struct EdgeSample {
  std::size_t index = 0;
  double p_in = 0.0;
  double p_f = 0.0;
  double p_coherent = 0.0;
};

struct Trace {
  std::vector<double> times;
  std::vector<double> p_in;        // P_1(t), photons/ns
  std::vector<double> p_f;         // forward output, photons/ns
  std::vector<double> p_b;         // backward output, photons/ns
  std::vector<double> sum_rho_ee;  // total excitation
  std::vector<double> p_coherent;  // |alpha_{N+1}|^2
  std::size_t n_atoms = 0;

  // Optional diagnostics, row-major [sample][atom].
  std::vector<double> per_atom_rho_ee;
  std::vector<complex> per_atom_rho_ge;
  std::vector<complex> per_atom_alpha;  // drive amplitude alpha_k of atom k

  std::vector<EdgeSample> edges;

  std::size_t size() const { return times.size(); }
  const EdgeSample* edge_at(std::size_t sample) const {
    for (const EdgeSample& e : edges) {
      if (e.index == sample) return &e;
    }
    return nullptr;
  }
  bool has_per_atom() const { return !per_atom_rho_ee.empty(); }
  bool has_coherences() const { return !per_atom_rho_ge.empty(); }
  double rho_ee(std::size_t sample, std::size_t atom) const {
    return per_atom_rho_ee[sample * n_atoms + atom];
  }
  complex rho_ge(std::size_t sample, std::size_t atom) const {
    return per_atom_rho_ge[sample * n_atoms + atom];
  }
  complex alpha(std::size_t sample, std::size_t atom) const {
    return per_atom_alpha[sample * n_atoms + atom];
  }
};

/// Per-atom diagnostics stored in a Trace.
enum class Diagnostics {
  none,
  populations,  // rho_ee per atom
  full,         // rho_ee, rho_ge and the drive amplitude alpha_k per atom
};

struct SimulationOptions {
  Diagnostics per_atom = Diagnostics::none;
  bool check_invariants = true;
  /// Chain lengths to report. Because the cascade has no back-action, the
  /// first n atoms of a chain evolve exactly as an n-atom chain would, so one
  /// run yields traces for every prefix. Empty means the full chain only.
  std::vector<std::size_t> prefixes;
};

struct CascadeOutput {
  std::vector<complex> alpha;  // alpha_1 .. alpha_N
  complex alpha_out;           // alpha_{N+1}
};

/// alpha_{k+1} = alpha_k - i sqrt(beta_f,k Gamma) rho_ge,k, swept from the input.
CascadeOutput field_sweep(std::span<const AtomState> states, FieldAmplitude alpha_in,
                          std::span<const double> beta_f, double gamma);

/// Integrates the whole chain from the ground state with fixed-step RK4; every
/// stage re-sweeps the cascade so each atom sees same-stage upstream fields.
Trace simulate(const ChainConfig& config, const TimeGrid& grid,
               const SimulationOptions& options = {});

/// One trace per requested prefix length, in the order given.
std::vector<Trace> simulate_prefixes(const ChainConfig& config, const TimeGrid& grid,
                                     const SimulationOptions& options);

/// r(t) = P_1 - P_f - sum_k (1 - beta_f,k) Gamma rho_ee,k - d/dt sum_k rho_ee,k.
struct EnergyBalance {
  std::vector<double> residual;
  double max_abs_residual = 0.0;
  double peak_flux = 0.0;
};

/// Photon-number balance of a trace produced with per-atom diagnostics.
/// The time derivative is a second-order finite difference; at the kinks of
/// an ideal rectangular pulse and at the grid ends one-sided stencils are used.
EnergyBalance energy_ledger(const Trace& trace, const ChainConfig& config, const TimeGrid& grid);

}  // namespace cascadewg
