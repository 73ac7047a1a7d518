// oracles.hpp - independent reference solutions used to validate the
// cascade integrator: the coherence-linearised chain, a per-atom sequential
// fine-step Euler solver, and closed-form limits.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cascadewg/cascade.hpp"

namespace cascadewg {

/// Weak-drive limit of the cascade: every atom is a damped dipole
/// d rho_ge/dt = -(Gamma/2) rho_ge - i Omega_k / 2 with the population
/// neglected in the drive term. Atoms are advanced one after another within
/// each step with an exponential integrator that is exact for a drive that
/// is linear across the step. P_f is the coherent power |alpha_{N+1}|^2;
/// sum_rho_ee holds sum_k |rho_ge,k|^2.
Trace linear_response_simulate(const ChainConfig& config, const TimeGrid& grid);
/// One linear-response trace per requested prefix length of the chain.
std::vector<Trace> linear_response_prefixes(const ChainConfig& config, const TimeGrid& grid,
                                            std::span<const std::size_t> prefixes);

inline constexpr std::size_t kFineStepMaxAtoms = 32;

/// Atom k is integrated over the whole grid with explicit Euler at step
/// dt / refinement before atom k + 1 is touched. The upstream radiated field
/// sum_{j<k} g_j rho_ge,j is stored on the coarse grid and interpolated
/// linearly; the probe itself is evaluated exactly.
Trace fine_step_reference(const ChainConfig& config, const TimeGrid& grid, int refinement = 100);

/// Photons in a pulse of the given duration whose area is pi for coupling beta_f.
double pi_pulse_photon_number(double beta_f, double gamma, double duration);

/// Continuous-wave steady state under a real resonant Rabi frequency.
AtomState steady_state(double rabi, double gamma);

/// Weak continuous-wave amplitude transmission prod_k (1 - 2 beta_f,k).
double weak_cw_transmission(std::span<const double> beta_f);

struct AnalyticLimits {
  double pi_pulse_photons = 0.0;
  double pi_pulse_flux = 0.0;           // photons/ns
  double single_atom_transmission = 0.0;  // amplitude, weak CW
};

AnalyticLimits analytic_limits(const PhysicalParams& params, double pulse_duration);

}  // namespace cascadewg
