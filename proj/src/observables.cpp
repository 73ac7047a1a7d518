#include "cascadewg/observables.hpp"

#include <cmath>
#include <vector>

namespace cascadewg {

namespace {

constexpr double kIllConditioned = 1e-6;

// Index of t in the trace; the trace grid is uniform.
std::size_t sample_index(const Trace& trace, double t) {
  if (trace.size() < 2) throw DomainError("trace too short");
  const double dt = trace.times[1] - trace.times[0];
  const double k = (t - trace.times.front()) / dt;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-6 || r < 0 || r > static_cast<double>(trace.size() - 1)) {
    throw DomainError("window boundary is not a grid point of the trace");
  }
  return static_cast<std::size_t>(r);
}

void require_atoms(const Trace& trace) {
  if (trace.n_atoms == 0) throw DomainError("per-atom quantity undefined for an empty chain");
}

}  // namespace

PulseWindows PulseWindows::for_pulse(const PulseShape& pulse, const TimeGrid& grid) {
  return PulseWindows{pulse.t_on, pulse.t_off, pulse.t_off, grid.t_end()};
}

void PulseWindows::validate(const Trace& trace) const {
  if (!(absorb_start < absorb_end) || !(emit_start < emit_end)) {
    throw DomainError("empty integration window");
  }
  sample_index(trace, absorb_start);
  sample_index(trace, absorb_end);
  sample_index(trace, emit_start);
  sample_index(trace, emit_end);
}

double integrate(const Trace& trace, std::span<const double> y, double t0, double t1) {
  const std::size_t i0 = sample_index(trace, t0);
  const std::size_t i1 = sample_index(trace, t1);
  double sum = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    sum += 0.5 * (trace.times[i + 1] - trace.times[i]) * (y[i] + y[i + 1]);
  }
  return sum;
}

double absorbed_per_atom(const Trace& trace, const PulseWindows& w) {
  require_atoms(trace);
  std::vector<double> loss(trace.size());
  for (std::size_t i = 0; i < loss.size(); ++i) loss[i] = trace.p_in[i] - trace.p_f[i];
  // Samples hold right limits; where the pulse switches off at absorb_end
  // the integrand ends on its left limit.
  if (const EdgeSample* e = trace.edge_at(sample_index(trace, w.absorb_end))) {
    loss[e->index] = e->p_in - e->p_f;
  }
  return integrate(trace, loss, w.absorb_start, w.absorb_end) /
         static_cast<double>(trace.n_atoms);
}

double emitted_per_atom(const Trace& trace, const PulseWindows& w, Direction direction) {
  require_atoms(trace);
  const std::vector<double>& y = direction == Direction::forward ? trace.p_f : trace.p_b;
  return integrate(trace, y, w.emit_start, w.emit_end) / static_cast<double>(trace.n_atoms);
}

double backward_during_pulse_per_atom(const Trace& trace, const PulseWindows& w) {
  require_atoms(trace);
  return integrate(trace, trace.p_b, w.absorb_start, w.absorb_end) /
         static_cast<double>(trace.n_atoms);
}

EmissionFraction eta(double n_em, double n_abs) {
  if (n_abs == 0.0) throw DomainError("emission fraction undefined for zero absorption");
  return EmissionFraction{n_em / n_abs, std::abs(n_abs) < kIllConditioned};
}

double excited_fraction_at_zero(std::span<const double> rho_ee_at_zero) {
  if (rho_ee_at_zero.empty()) return 0.0;
  double sum = 0.0;
  for (double r : rho_ee_at_zero) sum += r;
  return sum / static_cast<double>(rho_ee_at_zero.size());
}

double excited_fraction_at_zero(const Trace& trace) {
  require_atoms(trace);
  return trace.sum_rho_ee[sample_index(trace, 0.0)] / static_cast<double>(trace.n_atoms);
}

DecayFit fit_decay_constant(std::span<const double> times, std::span<const double> power,
                            double t0, double t1) {
  if (!(t0 < t1)) throw DomainError("decay fit window is empty");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < t0 - 1e-9 || t > t1 + 1e-9) continue;
    if (!(power[i] > 0.0)) throw DomainError("decay fit needs P_f > 0 over the fit window");
    points.emplace_back(t, std::log(power[i]));
  }
  m = points.size();
  if (m < 2) throw DomainError("decay fit window holds fewer than two samples");
  // Centre the abscissa for conditioning.
  double t_mean = 0.0;
  for (const auto& [t, y] : points) t_mean += t;
  t_mean /= static_cast<double>(m);
  for (const auto& [t, y] : points) {
    const double x = t - t_mean;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(m);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt_centered = (sy - slope * sx) / n;
  DecayFit fit;
  fit.slope = slope;
  fit.intercept = icpt_centered - slope * t_mean;
  fit.tau = -1.0 / slope;
  double ss = 0.0;
  for (const auto& [t, y] : points) {
    const double r = y - (fit.intercept + slope * t);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

DecayFit fit_decay_constant(const Trace& trace, double t0, double t1) {
  return fit_decay_constant(trace.times, trace.p_f, t0, t1);
}

ObservableSet compute_observables(const Trace& trace, const PulseWindows& windows,
                                  double fit_start, double fit_end) {
  windows.validate(trace);
  ObservableSet o;
  o.n_abs = absorbed_per_atom(trace, windows);
  o.n_em_f = emitted_per_atom(trace, windows, Direction::forward);
  o.n_em_b = emitted_per_atom(trace, windows, Direction::backward);
  o.n_em_b_pulse = backward_during_pulse_per_atom(trace, windows);
  o.p_exc = excited_fraction_at_zero(trace);
  if (o.n_abs != 0.0) {
    const EmissionFraction f = eta(o.n_em_f, o.n_abs);
    o.eta_f = f.value;
    o.eta_b = eta(o.n_em_b, o.n_abs).value;
    o.ill_conditioned = f.ill_conditioned;
  } else {
    o.ill_conditioned = true;
  }
  try {
    o.tau_decay = fit_decay_constant(trace, windows.emit_start + fit_start,
                                     windows.emit_start + fit_end)
                      .tau;
  } catch (const DomainError&) {
    o.tau_decay.reset();
  }
  return o;
}

}  // namespace cascadewg
