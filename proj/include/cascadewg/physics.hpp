// physics.hpp - units, physical constants, probe pulses and the single-atom
// optical Bloch right-hand side for a resonantly driven two-level atom.
//
// Unit system used throughout the library:
//   time          ns
//   rates         1/ns (angular frequencies in rad/ns)
//   optical power photons/ns (SI watts only at the boundary)
//   field amplitude sqrt(photons/ns)

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cascadewg {

using complex = std::complex<double>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace constants {
inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double cs_d2_lifetime_ns = 30.5;
inline constexpr double cs_d2_wavelength_nm = 852.0;
inline constexpr double backward_ratio = 0.087;  // beta_b / beta_f
}  // namespace constants

struct PhysicalParams {
  double gamma_total = 1.0 / constants::cs_d2_lifetime_ns;  // 1/ns
  double beta_f = 0.0108;
  double beta_b = constants::backward_ratio * 0.0108;
  double wavelength_nm = constants::cs_d2_wavelength_nm;

  /// Forward emission rate Gamma_f = beta_f * Gamma.
  double gamma_forward() const { return beta_f * gamma_total; }

  /// Throws DomainError when any invariant is broken.
  void validate() const;

  /// Defaults with beta_b tied to beta_f by the cesium chirality ratio.
  static PhysicalParams with_beta(double beta_f);
};

/// Reduced single-atom density matrix. The trace is fixed to one, so only
/// rho_ee and the coherence are stored. The coherence uses the phase
/// convention of the input-output relation alpha_out = alpha - i g rho_ge,
/// i.e. in the weak-drive steady state rho_ge = -i Omega / Gamma.
struct AtomState {
  double rho_ee = 0.0;
  complex rho_ge{0.0, 0.0};

  static constexpr double positivity_tolerance = 1e-9;

  double rho_gg() const { return 1.0 - rho_ee; }
  /// |rho_ge|^2 <= rho_ee rho_gg within positivity_tolerance.
  bool is_physical(double tol = positivity_tolerance) const;
};

/// Time derivative of an AtomState.
struct AtomStateRate {
  double d_rho_ee = 0.0;
  complex d_rho_ge{0.0, 0.0};
};

/// Coherent guided-mode amplitude; |value|^2 is a photon flux (photons/ns).
struct FieldAmplitude {
  complex value{0.0, 0.0};

  double flux() const { return std::norm(value); }
  static FieldAmplitude from_flux(double flux);
};

/// Rectangular probe pulse with optional raised-cosine edges. The drive is on
/// for t in [t_on, t_off); for edge_time > 0 the flux ramps up over
/// [t_on, t_on + edge_time] and down over [t_off - edge_time, t_off].
struct PulseShape {
  double peak_flux = 0.0;  // photons/ns
  double t_on = -5.0;      // ns
  double t_off = 0.0;      // ns
  double edge_time = 0.0;  // ns

  void validate() const;
  double duration() const { return t_off - t_on; }

  /// Right-continuous flux at t.
  double flux(double t) const;
  /// Left limit of the flux at t; differs from flux(t) only at the edges of
  /// an ideal rectangle.
  double flux_left(double t) const;
  /// Input amplitude sqrt(flux) with the probe phase fixed to be real.
  FieldAmplitude amplitude(double t) const { return FieldAmplitude::from_flux(flux(t)); }
  FieldAmplitude amplitude_left(double t) const {
    return FieldAmplitude::from_flux(flux_left(t));
  }
};

/// Photon energy h c / lambda in joules.
double photon_energy_joules(double wavelength_nm);

/// Optical power in W to photon flux in photons/ns.
double power_to_flux(double power_watts, const PhysicalParams& params);
/// Photon flux in photons/ns to optical power in W.
double flux_to_power(double flux, const PhysicalParams& params);

/// Rabi frequency sqrt(4 beta_f Gamma flux) in rad/ns.
double rabi_frequency(double flux, double beta_f, double gamma);
inline double pulse_area(double rabi, double duration) { return rabi * duration; }
/// Flux that produces the given pulse area on an atom with coupling beta_f.
double flux_for_pulse_area(double area, double duration, double beta_f, double gamma);

/// Resonant rotating-frame Bloch equations generated by
/// H = (Omega/2)(sigma^+ + sigma) and spontaneous decay at rate gamma.
inline AtomStateRate bloch_rhs(const AtomState& s, complex omega, double gamma) {
  const complex half_omega = 0.5 * omega;
  AtomStateRate r;
  // d rho_ee = -Im(Omega^* rho_ge) - Gamma rho_ee
  r.d_rho_ee = -(omega.real() * s.rho_ge.imag() - omega.imag() * s.rho_ge.real()) -
               gamma * s.rho_ee;
  // d rho_ge = -i (Omega/2)(1 - 2 rho_ee) - (Gamma/2) rho_ge
  const double inversion = 1.0 - 2.0 * s.rho_ee;
  r.d_rho_ge = complex(half_omega.imag() * inversion, -half_omega.real() * inversion) -
               0.5 * gamma * s.rho_ge;
  return r;
}

}  // namespace cascadewg
