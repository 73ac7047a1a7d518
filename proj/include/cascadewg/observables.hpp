// observables.hpp - photon bookkeeping on simulated traces: absorbed and
// emitted photons per atom, emission fractions, excitation at pulse end and
// the post-pulse decay constant.

#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "cascadewg/cascade.hpp"

namespace cascadewg {

/// Integration windows in ns. The absorption window is the pulse-on
/// interval [t_on, t_off]; emission is counted from t_off to the grid end.
struct PulseWindows {
  double absorb_start = -5.0;
  double absorb_end = 0.0;
  double emit_start = 0.0;
  double emit_end = 100.0;

  static PulseWindows for_pulse(const PulseShape& pulse, const TimeGrid& grid);
  void validate(const Trace& trace) const;
};

enum class Direction { forward, backward };

/// Trapezoidal integral of samples y over [t0, t1] on the trace grid. Both
/// ends must be grid points.
double integrate(const Trace& trace, std::span<const double> y, double t0, double t1);

/// (1/N) integral over the absorption window of (P_1 - P_f).
double absorbed_per_atom(const Trace& trace, const PulseWindows& windows);
/// (1/N) integral over the emission window of P_f or P_b.
double emitted_per_atom(const Trace& trace, const PulseWindows& windows, Direction direction);
/// Backward photons per atom emitted while the pulse is on (diagnostic).
double backward_during_pulse_per_atom(const Trace& trace, const PulseWindows& windows);

struct EmissionFraction {
  double value = 0.0;
  bool ill_conditioned = false;  // absorbed photons below 1e-6 per atom
};

/// n_em / n_abs.
EmissionFraction eta(double n_em, double n_abs);

/// Mean of per-atom excited populations.
double excited_fraction_at_zero(std::span<const double> rho_ee_at_zero);
/// Mean excitation per atom at t = 0 from the summed population column.
double excited_fraction_at_zero(const Trace& trace);

struct DecayFit {
  double tau = 0.0;        // ns
  double slope = 0.0;      // 1/ns, of log P_f
  double intercept = 0.0;  // log P_f at t = 0
  double rms_residual = 0.0;
};

/// Default window of the log-linear decay fit, in ns after the pulse.
inline constexpr double kDecayFitStart = 1.0;
inline constexpr double kDecayFitEnd = 11.0;

/// Least-squares line through log P_f(t) for t in [t0, t1]; tau = -1/slope.
DecayFit fit_decay_constant(const Trace& trace, double t0 = kDecayFitStart,
                            double t1 = kDecayFitEnd);
/// Same fit on raw samples.
DecayFit fit_decay_constant(std::span<const double> times, std::span<const double> power,
                            double t0, double t1);

struct ObservableSet {
  double n_abs = 0.0;
  double n_em_f = 0.0;
  double n_em_b = 0.0;
  double n_em_b_pulse = 0.0;  // backward emission during the pulse
  double eta_f = 0.0;
  double eta_b = 0.0;
  double p_exc = 0.0;
  std::optional<double> tau_decay;
  bool ill_conditioned = false;
};

/// Every observable of one trace. tau is left empty when P_f is not strictly
/// positive across the fit window.
ObservableSet compute_observables(const Trace& trace, const PulseWindows& windows,
                                  double fit_start = kDecayFitStart,
                                  double fit_end = kDecayFitEnd);

}  // namespace cascadewg
