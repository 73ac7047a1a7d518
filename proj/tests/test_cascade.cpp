#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cascadewg/cascade.hpp"
#include "cascadewg/oracles.hpp"
#include "doctest.h"

using namespace cascadewg;

namespace {

constexpr double kGamma = 1.0 / 30.5;

PulseShape pulse_with_area(double area_over_pi, double beta, double edge = 0.0) {
  PulseShape p;
  p.peak_flux = flux_for_pulse_area(area_over_pi * std::numbers::pi, 5.0, beta, kGamma);
  p.edge_time = edge;
  return p;
}

std::vector<double> random_betas(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.025);
  std::vector<double> b(n);
  for (double& x : b) x = u(rng);
  return b;
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g;
  CHECK(g.t_start() == -5.0);
  CHECK(g.t_end() == doctest::Approx(100.0));
  CHECK(g.size() == 21001);
  CHECK(g.time(g.index_of(0.0)) == 0.0);
  CHECK(g.index_of(0.0) == 1000);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0.3), DomainError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(g.index_of(200.0), DomainError);
  CHECK(g.refined(2).size() == 42001);
}

TEST_CASE("field_sweep") {
  const double beta = 0.0108;
  SUBCASE("transparent chain") {
    std::vector<AtomState> states(5);
    std::vector<double> betas(5, beta);
    const auto out = field_sweep(states, FieldAmplitude{complex(2.0, 0.0)}, betas, kGamma);
    for (const complex& a : out.alpha) CHECK(a == complex(2.0, 0.0));
    CHECK(out.alpha_out == complex(2.0, 0.0));
  }
  SUBCASE("weak continuous-wave steady state") {
    // Linearised steady state rho_ge = -i Omega / Gamma, atom by atom.
    const std::size_t n = 10;
    const complex alpha_in(0.01, 0.0);
    std::vector<AtomState> states(n);
    std::vector<double> betas(n, beta);
    complex alpha = alpha_in;
    for (std::size_t k = 0; k < n; ++k) {
      const complex omega = 2.0 * std::sqrt(beta * kGamma) * alpha;
      states[k].rho_ge = complex(0.0, -1.0) * omega / kGamma;
      alpha -= complex(0.0, std::sqrt(beta * kGamma)) * states[k].rho_ge;
    }
    const auto one = field_sweep(std::span(states).first(1), FieldAmplitude{alpha_in},
                                 std::span(betas).first(1), kGamma);
    CHECK(std::abs(one.alpha_out / alpha_in - (1.0 - 2.0 * beta)) < 1e-14);
    const auto all = field_sweep(states, FieldAmplitude{alpha_in}, betas, kGamma);
    CHECK(std::abs(all.alpha_out / alpha_in - std::pow(1.0 - 2.0 * beta, 10)) < 1e-13);
  }
  SUBCASE("length mismatch") {
    std::vector<AtomState> states(2);
    std::vector<double> betas(3, beta);
    CHECK_THROWS_AS(field_sweep(states, FieldAmplitude{}, betas, kGamma), DomainError);
  }
}

TEST_CASE("empty chain passes the probe unchanged") {
  ChainConfig cfg{PhysicalParams{}, {}, pulse_with_area(1.0, 0.0108)};
  const Trace tr = simulate(cfg, TimeGrid(-5.0, 20.0, 0.01));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.p_f[i] == tr.p_in[i]);
    CHECK(tr.p_b[i] == 0.0);
  }
}

TEST_CASE("trace invariants over a pulse-area sweep") {
  const TimeGrid grid(-5.0, 60.0, 0.01);
  const auto betas = random_betas(40, 3);
  for (double area : {0.1, 0.7, 1.0, 1.3, 2.0}) {
    ChainConfig cfg{PhysicalParams{}, betas, pulse_with_area(area, 0.0108)};
    SimulationOptions opt;
    opt.per_atom = Diagnostics::full;
    const Trace tr = simulate(cfg, grid, opt);
    REQUIRE(tr.p_f.size() == grid.size());
    REQUIRE(tr.p_b.size() == grid.size());
    REQUIRE(tr.sum_rho_ee.size() == grid.size());
    double worst_coherent = 0.0, worst_positivity = 0.0, worst_backward = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(tr.p_f[i] >= -1e-9);
      CHECK(tr.p_b[i] >= 0.0);
      CHECK(tr.sum_rho_ee[i] >= -1e-9);
      CHECK(tr.sum_rho_ee[i] <= 40.0 + 1e-9);
      worst_coherent = std::max(worst_coherent, tr.p_coherent[i] - tr.p_f[i]);
      double non_forward = 0.0;
      for (std::size_t k = 0; k < 40; ++k) {
        const double ee = tr.rho_ee(i, k);
        worst_positivity = std::max(worst_positivity, std::norm(tr.rho_ge(i, k)) - ee * (1.0 - ee));
        non_forward += (1.0 - betas[k]) * kGamma * ee;
      }
      worst_backward = std::max(worst_backward, tr.p_b[i] - non_forward);
    }
    CHECK(worst_coherent <= 1e-9);
    CHECK(worst_positivity <= 1e-9);
    CHECK(worst_backward <= 0.0);
  }
}

TEST_CASE("stored drive amplitudes follow the input-output relation") {
  const TimeGrid grid(-5.0, 10.0, 0.01);
  ChainConfig cfg{PhysicalParams{}, random_betas(12, 5), pulse_with_area(0.8, 0.0108)};
  SimulationOptions opt;
  opt.per_atom = Diagnostics::full;
  const Trace tr = simulate(cfg, grid, opt);
  for (std::size_t i : {std::size_t{0}, std::size_t{250}, std::size_t{499}, std::size_t{900}}) {
    std::vector<AtomState> states(12);
    for (std::size_t k = 0; k < 12; ++k) states[k] = AtomState{tr.rho_ee(i, k), tr.rho_ge(i, k)};
    const auto sweep = field_sweep(states, FieldAmplitude::from_flux(tr.p_in[i]), cfg.beta_f, kGamma);
    for (std::size_t k = 0; k < 12; ++k) CHECK(std::abs(sweep.alpha[k] - tr.alpha(i, k)) < 1e-12);
    CHECK(std::norm(sweep.alpha_out) == doctest::Approx(tr.p_coherent[i]).epsilon(1e-12));
  }
}

TEST_CASE("real drive keeps coherences imaginary and fields real") {
  const TimeGrid grid(-5.0, 40.0, 0.005);
  ChainConfig cfg{PhysicalParams{}, random_betas(30, 9), pulse_with_area(1.3, 0.0108)};
  SimulationOptions opt;
  opt.per_atom = Diagnostics::full;
  const Trace tr = simulate(cfg, grid, opt);
  double max_re = 0.0, max_im_alpha = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (std::size_t k = 0; k < 30; ++k) {
      max_re = std::max(max_re, std::abs(tr.rho_ge(i, k).real()));
      max_im_alpha = std::max(max_im_alpha, std::abs(tr.alpha(i, k).imag()));
    }
  }
  CHECK(max_re < 1e-9);
  CHECK(max_im_alpha < 1e-9);
}

TEST_CASE("single atom relaxes to the driven steady state") {
  for (double s : {0.01, 1.0, 100.0}) {
    const double rabi = kGamma * std::sqrt(s / 2.0);
    const double beta = 0.0108;
    PulseShape cw{rabi * rabi / (4.0 * beta * kGamma), 0.0, 5000.0, 0.0};
    ChainConfig cfg{PhysicalParams{}, {beta}, cw};
    const Trace tr = simulate(cfg, TimeGrid(0.0, 1500.0, 0.02));
    CHECK(tr.sum_rho_ee.back() == doctest::Approx(0.5 * s / (1.0 + s)).epsilon(1e-6));
  }
}

TEST_CASE("prefix traces equal shorter chains") {
  const TimeGrid grid(-5.0, 30.0, 0.01);
  const auto betas = random_betas(37, 21);
  ChainConfig cfg{PhysicalParams{}, betas, pulse_with_area(0.9, 0.0108)};
  SimulationOptions opt;
  opt.prefixes = {37, 0, 5, 20};
  const auto traces = simulate_prefixes(cfg, grid, opt);
  REQUIRE(traces.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    ChainConfig shorter = cfg;
    shorter.beta_f.resize(opt.prefixes[j]);
    const Trace ref = simulate(shorter, grid);
    CHECK(traces[j].n_atoms == opt.prefixes[j]);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, std::abs(ref.p_f[i] - traces[j].p_f[i]));
      worst = std::max(worst, std::abs(ref.sum_rho_ee[i] - traces[j].sum_rho_ee[i]));
    }
    CHECK(worst < 1e-10 * cfg.pulse.peak_flux);
  }
  opt.prefixes = {38};
  CHECK_THROWS_AS(simulate_prefixes(cfg, grid, opt), DomainError);
}

TEST_CASE("step halving shows fourth-order convergence on smooth pulses") {
  ChainConfig cfg{PhysicalParams{}, random_betas(20, 4), pulse_with_area(1.0, 0.0108, 1.0)};
  const Trace coarse = simulate(cfg, TimeGrid(-5.0, 40.0, 0.04));
  const Trace mid = simulate(cfg, TimeGrid(-5.0, 40.0, 0.02));
  const Trace fine = simulate(cfg, TimeGrid(-5.0, 40.0, 0.01));
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    e1 = std::max(e1, std::abs(coarse.p_f[i] - mid.p_f[2 * i]));
    e2 = std::max(e2, std::abs(mid.p_f[2 * i] - fine.p_f[4 * i]));
  }
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("energy ledger") {
  SUBCASE("empty chain") {
    ChainConfig cfg{PhysicalParams{}, {}, pulse_with_area(1.0, 0.0108)};
    const TimeGrid grid(-5.0, 20.0, 0.005);
    const auto bal = energy_ledger(simulate(cfg, grid), cfg, grid);
    CHECK(bal.max_abs_residual == 0.0);
  }
  SUBCASE("weak drive") {
    ChainConfig cfg{PhysicalParams{}, random_betas(50, 8), pulse_with_area(0.05, 0.0108)};
    const TimeGrid grid(-5.0, 100.0, 0.005);
    SimulationOptions opt;
    opt.per_atom = Diagnostics::populations;
    const auto bal = energy_ledger(simulate(cfg, grid, opt), cfg, grid);
    CHECK(bal.max_abs_residual < 1e-6 * bal.peak_flux);
  }
  SUBCASE("residual shrinks quadratically with dt") {
    ChainConfig cfg{PhysicalParams{}, random_betas(30, 2), pulse_with_area(1.0, 0.0108)};
    SimulationOptions opt;
    opt.per_atom = Diagnostics::populations;
    const TimeGrid g1(-5.0, 40.0, 0.02), g2(-5.0, 40.0, 0.01);
    const double r1 = energy_ledger(simulate(cfg, g1, opt), cfg, g1).max_abs_residual;
    const double r2 = energy_ledger(simulate(cfg, g2, opt), cfg, g2).max_abs_residual;
    CHECK(r1 / r2 >= 3.5);
  }
  SUBCASE("requires populations") {
    ChainConfig cfg{PhysicalParams{}, {0.01}, pulse_with_area(1.0, 0.01)};
    const TimeGrid grid(-5.0, 5.0, 0.01);
    CHECK_THROWS_AS(energy_ledger(simulate(cfg, grid), cfg, grid), DomainError);
  }
}

TEST_CASE("integration diagnostics name the offending time and atom") {
  // A step far beyond the RK4 stability limit drives the state unphysical.
  ChainConfig cfg{PhysicalParams{}, std::vector<double>(5, 0.5), pulse_with_area(40.0, 0.5)};
  cfg.params = PhysicalParams::with_beta(0.5);
  try {
    simulate(cfg, TimeGrid(-5.0, 100.0, 2.5));
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time_ns() > -5.0);
    CHECK(e.atom_index() < 5);
    CHECK(std::string(e.what()).find("atom") != std::string::npos);
  }
}

TEST_CASE("chain validation") {
  ChainConfig cfg{PhysicalParams{}, {0.01, 1.5}, pulse_with_area(1.0, 0.01)};
  CHECK_THROWS_AS(simulate(cfg, TimeGrid(-5.0, 5.0, 0.01)), DomainError);
}
