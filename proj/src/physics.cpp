#include "cascadewg/physics.hpp"

#include <cmath>
#include <numbers>

namespace cascadewg {

void PhysicalParams::validate() const {
  if (!(gamma_total > 0.0)) throw DomainError("gamma_total must be positive");
  if (!(beta_f >= 0.0 && beta_f <= 1.0)) throw DomainError("beta_f must lie in [0, 1]");
  if (!(beta_b >= 0.0 && beta_b <= 1.0)) throw DomainError("beta_b must lie in [0, 1]");
  if (beta_f + beta_b > 1.0) throw DomainError("beta_f + beta_b must not exceed 1");
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
}

PhysicalParams PhysicalParams::with_beta(double beta_f) {
  PhysicalParams p;
  p.beta_f = beta_f;
  p.beta_b = constants::backward_ratio * beta_f;
  return p;
}

bool AtomState::is_physical(double tol) const {
  if (rho_ee < -tol || rho_ee > 1.0 + tol) return false;
  return std::norm(rho_ge) <= rho_ee * (1.0 - rho_ee) + tol;
}

FieldAmplitude FieldAmplitude::from_flux(double flux) {
  return FieldAmplitude{complex(std::sqrt(flux), 0.0)};
}

void PulseShape::validate() const {
  if (!(t_on < t_off)) throw DomainError("pulse requires t_on < t_off");
  if (!(peak_flux >= 0.0)) throw DomainError("pulse peak flux must be nonnegative");
  if (!(edge_time >= 0.0) || edge_time > 0.5 * (t_off - t_on))
    throw DomainError("pulse edge time must lie in [0, duration/2]");
}

namespace {

// Raised-cosine ramp from 0 at x = 0 to 1 at x = 1.
double ramp(double x) { return 0.5 * (1.0 - std::cos(std::numbers::pi * x)); }

}  // namespace

double PulseShape::flux(double t) const {
  if (t < t_on || t >= t_off) return 0.0;
  if (edge_time > 0.0) {
    if (t < t_on + edge_time) return peak_flux * ramp((t - t_on) / edge_time);
    if (t > t_off - edge_time) return peak_flux * ramp((t_off - t) / edge_time);
  }
  return peak_flux;
}

double PulseShape::flux_left(double t) const {
  if (edge_time > 0.0) return flux(t);  // continuous
  return (t > t_on && t <= t_off) ? peak_flux : 0.0;
}

double photon_energy_joules(double wavelength_nm) {
  return constants::planck * constants::speed_of_light / (wavelength_nm * 1e-9);
}

double power_to_flux(double power_watts, const PhysicalParams& params) {
  if (!(power_watts >= 0.0)) throw DomainError("optical power must be nonnegative");
  if (!(params.wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  return power_watts / photon_energy_joules(params.wavelength_nm) * 1e-9;
}

double flux_to_power(double flux, const PhysicalParams& params) {
  if (!(flux >= 0.0)) throw DomainError("photon flux must be nonnegative");
  if (!(params.wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  return flux * 1e9 * photon_energy_joules(params.wavelength_nm);
}

double rabi_frequency(double flux, double beta_f, double gamma) {
  if (flux < 0.0 || beta_f < 0.0 || gamma < 0.0)
    throw DomainError("rabi_frequency arguments must be nonnegative");
  return std::sqrt(4.0 * beta_f * gamma * flux);
}

double flux_for_pulse_area(double area, double duration, double beta_f, double gamma) {
  if (area < 0.0 || !(duration > 0.0) || !(beta_f > 0.0) || !(gamma > 0.0))
    throw DomainError("pulse area conversion needs area >= 0 and positive duration, beta_f, gamma");
  const double rabi = area / duration;
  return rabi * rabi / (4.0 * beta_f * gamma);
}

}  // namespace cascadewg
