#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cascadewg/physics.hpp"
#include "doctest.h"

using namespace cascadewg;

namespace {

using Mat2 = std::array<std::array<complex, 2>, 2>;  // index 0 = g, 1 = e

Mat2 mul(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

Mat2 dagger(const Mat2& a) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = std::conj(a[j][i]);
  return r;
}

// -i[H, rho] + Gamma (s rho s^+ - {s^+ s, rho}/2) with s = |g><e| and
// H = (Omega s^+ + Omega^* s) / 2.
Mat2 lindblad(const Mat2& rho, complex omega, double gamma) {
  Mat2 sigma{};
  sigma[0][1] = 1.0;
  const Mat2 sigma_dag = dagger(sigma);
  Mat2 h{};
  h[1][0] = 0.5 * omega;
  h[0][1] = 0.5 * std::conj(omega);
  const Mat2 hr = mul(h, rho), rh = mul(rho, h);
  const Mat2 jump = mul(mul(sigma, rho), sigma_dag);
  const Mat2 n = mul(sigma_dag, sigma);
  const Mat2 nr = mul(n, rho), rn = mul(rho, n);
  Mat2 out{};
  const complex i(0.0, 1.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out[a][b] = -i * (hr[a][b] - rh[a][b]) + gamma * (jump[a][b] - 0.5 * (nr[a][b] + rn[a][b]));
  return out;
}

}  // namespace

TEST_CASE("power and photon flux conversion") {
  const PhysicalParams p;
  CHECK(power_to_flux(0.0, p) == 0.0);

  // P lambda / (h c), evaluated directly in SI units.
  const double expected = 60e-9 * 852e-9 / (6.62607015e-34 * 299792458.0) * 1e-9;
  const double flux = power_to_flux(60e-9, p);
  CHECK(flux == doctest::Approx(expected).epsilon(1e-12));
  CHECK(flux == doctest::Approx(257.5).epsilon(1e-3));

  CHECK(flux_to_power(power_to_flux(20e-12, p), p) == doctest::Approx(20e-12).epsilon(1e-12));
  CHECK_THROWS_AS(power_to_flux(-1e-9, p), DomainError);

  PhysicalParams bad = p;
  bad.wavelength_nm = 0.0;
  CHECK_THROWS_AS(power_to_flux(1e-9, bad), DomainError);
}

TEST_CASE("power_to_flux is linear") {
  const PhysicalParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> power(0.0, 1e-6), factor(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = power(rng), a = factor(rng);
    CHECK(power_to_flux(a * x, p) == doctest::Approx(a * power_to_flux(x, p)).epsilon(1e-14));
  }
}

TEST_CASE("rabi frequency and pulse area") {
  const PhysicalParams p = PhysicalParams::with_beta(0.0108);
  CHECK(rabi_frequency(0.0, 0.0108, p.gamma_total) == 0.0);
  CHECK(rabi_frequency(4.0, 0.25, 1.0) == doctest::Approx(2.0));

  const double a_strong = pulse_area(rabi_frequency(power_to_flux(60e-9, p), 0.0108, p.gamma_total), 5.0);
  const double a_weak = pulse_area(rabi_frequency(power_to_flux(20e-12, p), 0.0108, p.gamma_total), 5.0);
  CHECK(a_strong / std::numbers::pi == doctest::Approx(1.0).epsilon(0.1));
  CHECK(a_strong / a_weak == doctest::Approx(std::sqrt(3000.0)).epsilon(1e-12));

  const double flux = flux_for_pulse_area(0.7 * std::numbers::pi, 5.0, 0.0108, p.gamma_total);
  CHECK(pulse_area(rabi_frequency(flux, 0.0108, p.gamma_total), 5.0) ==
        doctest::Approx(0.7 * std::numbers::pi).epsilon(1e-13));
  CHECK_THROWS_AS(rabi_frequency(-1.0, 0.01, 1.0), DomainError);
}

TEST_CASE("physical parameter invariants") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.gamma_forward() == p.beta_f * p.gamma_total);
  CHECK(p.beta_b == doctest::Approx(0.087 * p.beta_f));
  p.gamma_total = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = PhysicalParams{};
  p.beta_f = 0.95;
  p.beta_b = 0.1;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("bloch_rhs fixed points") {
  const double gamma = 1.0 / 30.5;
  const AtomStateRate ground = bloch_rhs(AtomState{}, complex(0.0, 0.0), gamma);
  CHECK(ground.d_rho_ee == 0.0);
  CHECK(ground.d_rho_ge == complex(0.0, 0.0));

  const AtomStateRate excited = bloch_rhs(AtomState{1.0, {0.0, 0.0}}, complex(0.0, 0.0), gamma);
  CHECK(excited.d_rho_ee == doctest::Approx(-gamma));
  CHECK(excited.d_rho_ge == complex(0.0, 0.0));
}

TEST_CASE("bloch_rhs matches the two-level Lindblad generator") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pop(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double ee = pop(rng);
    const double bound = std::sqrt(ee * (1.0 - ee));
    const complex c(bound * u(rng) * 0.7, bound * u(rng) * 0.7);
    const complex omega(u(rng), u(rng));
    const double gamma = 0.5 * pop(rng) + 0.01;

    Mat2 rho{};
    rho[1][1] = ee;
    rho[0][0] = 1.0 - ee;
    rho[1][0] = c;  // <e|rho|g>
    rho[0][1] = std::conj(c);
    const Mat2 d = lindblad(rho, omega, gamma);
    const AtomStateRate r = bloch_rhs(AtomState{ee, c}, omega, gamma);

    CHECK(std::abs(d[0][0] + d[1][1]) < 1e-15);  // trace preserved
    CHECK(r.d_rho_ee == doctest::Approx(d[1][1].real()).epsilon(1e-12));
    CHECK(std::abs(r.d_rho_ge - d[1][0]) < 1e-13);
  }
}

TEST_CASE("bloch_rhs steady state solves the stationary linear system") {
  // bloch_rhs is affine in (rho_ee, Re rho_ge, Im rho_ge); recover the affine
  // map column by column and solve rhs = 0 by Gaussian elimination.
  const double gamma = 1.0 / 30.5;
  for (double s : {0.01, 1.0, 100.0}) {
    const double rabi = gamma * std::sqrt(s / 2.0);
    auto f = [&](double ee, double cr, double ci) {
      const AtomStateRate r = bloch_rhs(AtomState{ee, complex(cr, ci)}, complex(rabi, 0.0), gamma);
      return std::array<double, 3>{r.d_rho_ee, r.d_rho_ge.real(), r.d_rho_ge.imag()};
    };
    const auto b = f(0, 0, 0);
    const auto e0 = f(1, 0, 0), e1 = f(0, 1, 0), e2 = f(0, 0, 1);
    double a[3][4];
    for (int row = 0; row < 3; ++row) {
      a[row][0] = e0[row] - b[row];
      a[row][1] = e1[row] - b[row];
      a[row][2] = e2[row] - b[row];
      a[row][3] = -b[row];
    }
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int row = col + 1; row < 3; ++row)
        if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
      for (int k = 0; k < 4; ++k) std::swap(a[col][k], a[piv][k]);
      for (int row = 0; row < 3; ++row) {
        if (row == col) continue;
        const double fct = a[row][col] / a[col][col];
        for (int k = 0; k < 4; ++k) a[row][k] -= fct * a[col][k];
      }
    }
    const double ee = a[0][3] / a[0][0];
    CHECK(ee == doctest::Approx(0.5 * s / (1.0 + s)).epsilon(1e-12));
  }
}

TEST_CASE("pulse shapes") {
  PulseShape rect{100.0, -5.0, 0.0, 0.0};
  CHECK(rect.flux(-2.5) == 100.0);
  CHECK(rect.flux(3.0) == 0.0);
  CHECK(rect.flux(-5.0) == 100.0);
  CHECK(rect.flux(0.0) == 0.0);
  CHECK(rect.flux_left(0.0) == 100.0);
  CHECK(rect.flux_left(-5.0) == 0.0);
  CHECK(rect.amplitude(-1.0).flux() == doctest::Approx(100.0));

  PulseShape smooth{100.0, -5.0, 0.0, 0.5};
  CHECK(smooth.flux(-5.0 + 0.25) == doctest::Approx(50.0));
  CHECK(smooth.flux(-0.25) == doctest::Approx(50.0));
  CHECK(smooth.flux(-2.5) == 100.0);
  for (double t = -6.0; t < 1.0; t += 0.01) {
    CHECK(std::abs(smooth.flux(t + 1e-9) - smooth.flux(t)) < 1e-5);
    CHECK(smooth.flux_left(t) == smooth.flux(t));
  }

  CHECK_THROWS_AS((PulseShape{1.0, 0.0, 0.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PulseShape{-1.0, -5.0, 0.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((PulseShape{1.0, -5.0, 0.0, 3.0}.validate()), DomainError);
}

TEST_CASE("atom state positivity") {
  CHECK(AtomState{}.is_physical());
  CHECK(AtomState{0.5, complex(0.0, 0.5)}.is_physical());
  CHECK_FALSE(AtomState{0.5, complex(0.0, 0.51)}.is_physical());
  CHECK_FALSE(AtomState{1.0 + 1e-6, complex(0.0, 0.0)}.is_physical());
}
