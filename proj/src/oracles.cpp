#include "cascadewg/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace cascadewg {

namespace {

Trace empty_trace(const TimeGrid& grid, std::size_t n_atoms) {
  Trace tr;
  const std::size_t m = grid.size();
  tr.n_atoms = n_atoms;
  tr.times.resize(m);
  for (std::size_t i = 0; i < m; ++i) tr.times[i] = grid.time(i);
  tr.p_in.assign(m, 0.0);
  tr.p_f.assign(m, 0.0);
  tr.p_b.assign(m, 0.0);
  tr.sum_rho_ee.assign(m, 0.0);
  tr.p_coherent.assign(m, 0.0);
  return tr;
}

bool is_edge(const PulseShape& pulse, double t) { return pulse.flux(t) != pulse.flux_left(t); }

}  // namespace

Trace linear_response_simulate(const ChainConfig& config, const TimeGrid& grid) {
  const std::size_t n = config.n_atoms();
  return linear_response_prefixes(config, grid, std::span(&n, 1)).front();
}

std::vector<Trace> linear_response_prefixes(const ChainConfig& config, const TimeGrid& grid,
                                            std::span<const std::size_t> prefixes) {
  config.validate();
  const std::size_t n = config.n_atoms();
  const double gamma = config.params.gamma_total;
  const double ratio_b = config.backward_ratio();
  const PulseShape& pulse = config.pulse;
  if (prefixes.empty()) throw DomainError("no prefix requested");
  for (std::size_t p : prefixes) {
    if (p > n) throw DomainError("prefix longer than the chain");
  }
  std::vector<Trace> out;
  for (std::size_t p : prefixes) out.push_back(empty_trace(grid, p));

  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = std::sqrt(config.beta_f[k] * gamma);

  // Exact propagator of dc/dt = -rate c + f(t) with f linear over the step.
  const double h = grid.dt();
  const double rate = 0.5 * gamma;
  const double decay = std::exp(-rate * h);
  const double w0 = -std::expm1(-rate * h) / rate;  // integral of e^{-rate (h - s)}
  const double w1 = (1.0 - w0 / h) / rate;          // same with weight s / h
  const complex minus_i(0.0, -1.0);

  std::vector<complex> c(n, complex(0.0, 0.0));
  // alpha, sum |c|^2 and backward flux after each atom, index 0 = input.
  std::vector<complex> alpha(n + 1);
  std::vector<double> sum_c2(n + 1), backward(n + 1);

  auto record = [&](std::size_t i, double input_flux, bool left) {
    alpha[0] = complex(std::sqrt(input_flux), 0.0);
    sum_c2[0] = 0.0;
    backward[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      alpha[k + 1] = alpha[k] + minus_i * g[k] * c[k];
      sum_c2[k + 1] = sum_c2[k] + std::norm(c[k]);
      backward[k + 1] = backward[k] + ratio_b * config.beta_f[k] * gamma * std::norm(c[k]);
    }
    for (std::size_t j = 0; j < prefixes.size(); ++j) {
      const std::size_t p = prefixes[j];
      Trace& tr = out[j];
      const double pf = p == 0 ? input_flux : std::norm(alpha[p]);
      if (left) {
        tr.edges.push_back(EdgeSample{i, input_flux, pf, pf});
        continue;
      }
      tr.p_in[i] = input_flux;
      tr.p_f[i] = pf;
      tr.p_coherent[i] = pf;
      tr.p_b[i] = backward[p];
      tr.sum_rho_ee[i] = sum_c2[p];
    }
  };

  record(0, pulse.flux(grid.time(0)), false);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double t0 = grid.time(i);
    const double t1 = grid.time(i + 1);
    complex alpha_start(std::sqrt(pulse.flux(t0)), 0.0);
    complex alpha_end(std::sqrt(pulse.flux_left(t1)), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const complex f0 = minus_i * g[k] * alpha_start;
      const complex f1 = minus_i * g[k] * alpha_end;
      const complex c_old = c[k];
      c[k] = decay * c_old + w0 * f0 + w1 * (f1 - f0);
      alpha_start += minus_i * g[k] * c_old;
      alpha_end += minus_i * g[k] * c[k];
    }
    if (is_edge(pulse, t1)) record(i + 1, pulse.flux_left(t1), true);
    record(i + 1, pulse.flux(t1), false);
  }
  return out;
}

Trace fine_step_reference(const ChainConfig& config, const TimeGrid& grid, int refinement) {
  config.validate();
  const std::size_t n = config.n_atoms();
  if (n > kFineStepMaxAtoms) throw DomainError("fine_step_reference is limited to 32 atoms");
  if (refinement < 10) throw DomainError("fine_step_reference needs refinement >= 10");

  const double gamma = config.params.gamma_total;
  const double ratio_b = config.backward_ratio();
  const PulseShape& pulse = config.pulse;
  const std::size_t m = grid.size();
  const double h = grid.dt() / refinement;
  const complex minus_i(0.0, -1.0);
  Trace tr = empty_trace(grid, n);
  tr.per_atom_rho_ee.resize(m * n);
  tr.per_atom_rho_ge.resize(m * n);
  tr.per_atom_alpha.resize(m * n);

  std::vector<double> edge_gain(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) tr.p_in[i] = pulse.flux(grid.time(i));

  // upstream[i] = sum_{j<k} g_j rho_ge,j(t_i)
  std::vector<complex> upstream(m, complex(0.0, 0.0));
  std::vector<complex> downstream(m);
  for (std::size_t k = 0; k < n; ++k) {
    const double g = std::sqrt(config.beta_f[k] * gamma);
    AtomState s;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = grid.time(i);
      const complex alpha = complex(std::sqrt(tr.p_in[i]), 0.0) + minus_i * upstream[i];
      const double im = alpha.real() * s.rho_ge.imag() - alpha.imag() * s.rho_ge.real();
      const double emitted = config.beta_f[k] * gamma * s.rho_ee;
      tr.p_f[i] += emitted + 2.0 * g * im;
      tr.p_b[i] += ratio_b * emitted;
      tr.sum_rho_ee[i] += s.rho_ee;
      tr.per_atom_rho_ee[i * n + k] = s.rho_ee;
      tr.per_atom_rho_ge[i * n + k] = s.rho_ge;
      tr.per_atom_alpha[i * n + k] = alpha;
      if (i > 0 && is_edge(pulse, t)) {
        const complex left = complex(std::sqrt(pulse.flux_left(t)), 0.0) + minus_i * upstream[i];
        edge_gain[i] += emitted +
                        2.0 * g * (left.real() * s.rho_ge.imag() - left.imag() * s.rho_ge.real());
      }
      downstream[i] = upstream[i] + g * s.rho_ge;
      if (i + 1 == m) break;

      for (int sub = 0; sub < refinement; ++sub) {
        const double frac = static_cast<double>(sub) / refinement;
        const double ts = t + sub * h;
        const complex radiated = upstream[i] + frac * (upstream[i + 1] - upstream[i]);
        const complex drive = pulse.amplitude(ts).value + minus_i * radiated;
        const AtomStateRate r = bloch_rhs(s, 2.0 * g * drive, gamma);
        s.rho_ee += h * r.d_rho_ee;
        s.rho_ge += h * r.d_rho_ge;
      }
    }
    upstream.swap(downstream);
  }

  for (std::size_t i = 0; i < m; ++i) {
    tr.p_coherent[i] = std::norm(complex(std::sqrt(tr.p_in[i]), 0.0) + minus_i * upstream[i]);
    const double t = grid.time(i);
    if (i > 0 && is_edge(pulse, t)) {
      const complex left_out = complex(std::sqrt(pulse.flux_left(t)), 0.0) + minus_i * upstream[i];
      tr.edges.push_back(EdgeSample{i, pulse.flux_left(t), pulse.flux_left(t) + edge_gain[i],
                                    std::norm(left_out)});
    }
    tr.p_f[i] += tr.p_in[i];
  }
  return tr;
}

double pi_pulse_photon_number(double beta_f, double gamma, double duration) {
  if (beta_f <= 0.0) return std::numeric_limits<double>::infinity();
  return flux_for_pulse_area(std::numbers::pi, duration, beta_f, gamma) * duration;
}

AtomState steady_state(double rabi, double gamma) {
  const double s = 2.0 * rabi * rabi / (gamma * gamma);
  return AtomState{0.5 * s / (1.0 + s), complex(0.0, -rabi / (gamma * (1.0 + s)))};
}

double weak_cw_transmission(std::span<const double> beta_f) {
  double t = 1.0;
  for (double b : beta_f) t *= 1.0 - 2.0 * b;
  return t;
}

AnalyticLimits analytic_limits(const PhysicalParams& params, double pulse_duration) {
  params.validate();
  AnalyticLimits out;
  out.pi_pulse_photons = pi_pulse_photon_number(params.beta_f, params.gamma_total, pulse_duration);
  out.pi_pulse_flux = out.pi_pulse_photons / pulse_duration;
  out.single_atom_transmission = 1.0 - 2.0 * params.beta_f;
  return out;
}

}  // namespace cascadewg
