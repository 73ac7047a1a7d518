#include "cascadewg/disorder.hpp"

#include <cmath>
#include <string>

#include "cascadewg/parallel.hpp"

namespace cascadewg {

void BetaDistribution::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("beta sigma must be >= 0");
  if (!std::isfinite(mean)) throw DomainError("beta mean must be finite");
  if (sigma == 0.0 && mean < 0.0) throw DomainError("degenerate beta distribution with mean < 0");
  if (!(mean > 0.0 || sigma > 0.0)) throw DomainError("beta distribution needs mean > 0 or sigma > 0");
}

double BetaDistribution::truncated_mass() const {
  if (sigma == 0.0) return mean < 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(mean / (sigma * std::sqrt(2.0)));
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + kGolden)), base_(stream << stream_bits), counter_(0) {
  if (stream >= (std::uint64_t{1} << (64 - stream_bits))) {
    throw DomainError("random stream index out of range");
  }
}

CounterRng::result_type CounterRng::operator()() {
  if (counter_ >= stream_length) throw DomainError("random stream exhausted");
  const std::uint64_t c = base_ | counter_++;
  return mix64(key_ + c * kGolden);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_beta(const BetaDistribution& dist, CounterRng& rng, SamplerStats* stats) {
  if (dist.degenerate()) {
    if (dist.mean < 0.0) throw DomainError("degenerate beta distribution with mean < 0");
    return dist.mean;
  }
  for (;;) {
    const double x = dist.mean + dist.sigma * rng.normal();
    if (stats) ++stats->proposals;
    if (x >= 0.0) return x;
    if (stats) ++stats->rejections;
  }
}

std::vector<double> draw_chain(const BetaDistribution& dist, std::size_t n_atoms,
                               std::uint64_t seed, std::uint64_t sample_index) {
  dist.validate();
  CounterRng rng(seed, sample_index);
  std::vector<double> beta(n_atoms);
  for (double& b : beta) b = sample_beta(dist, rng);
  return beta;
}

namespace {

void add_into(std::vector<double>& acc, const std::vector<double>& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

void add_into(std::vector<complex>& acc, const std::vector<complex>& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

template <typename T>
void scale(std::vector<T>& v, double f) {
  for (T& x : v) x *= f;
}

void accumulate(Trace& acc, const Trace& x) {
  add_into(acc.p_f, x.p_f);
  add_into(acc.p_b, x.p_b);
  add_into(acc.sum_rho_ee, x.sum_rho_ee);
  add_into(acc.p_coherent, x.p_coherent);
  add_into(acc.per_atom_rho_ee, x.per_atom_rho_ee);
  add_into(acc.per_atom_rho_ge, x.per_atom_rho_ge);
  add_into(acc.per_atom_alpha, x.per_atom_alpha);
  for (std::size_t j = 0; j < acc.edges.size(); ++j) {
    acc.edges[j].p_f += x.edges[j].p_f;
    acc.edges[j].p_coherent += x.edges[j].p_coherent;
  }
}

void finish_mean(Trace& acc, std::size_t n) {
  const double f = 1.0 / static_cast<double>(n);
  scale(acc.p_f, f);
  scale(acc.p_b, f);
  scale(acc.sum_rho_ee, f);
  scale(acc.p_coherent, f);
  scale(acc.per_atom_rho_ee, f);
  scale(acc.per_atom_rho_ge, f);
  scale(acc.per_atom_alpha, f);
  for (EdgeSample& e : acc.edges) {
    e.p_f *= f;
    e.p_coherent *= f;
  }
}

}  // namespace

std::vector<Trace> monte_carlo_average(const ChainConfig& base, const TimeGrid& grid,
                                       const MonteCarloSpec& spec,
                                       const SimulationOptions& options) {
  return monte_carlo_average(base, spec, [&](const ChainConfig& cfg) {
    return simulate_prefixes(cfg, grid, options);
  });
}

std::vector<Trace> monte_carlo_average(const ChainConfig& base, const MonteCarloSpec& spec,
                                       const ChainSimulator& simulator) {
  spec.dist.validate();
  if (spec.n_samples < 1) throw DomainError("n_samples must be >= 1");

  auto run_sample = [&](std::size_t s) {
    ChainConfig cfg = base;
    cfg.beta_f = draw_chain(spec.dist, spec.n_atoms, spec.seed, s);
    try {
      return simulator(cfg);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.time_ns(), e.atom_index(),
                             "Monte Carlo sample " + std::to_string(s) + ": " + e.reason());
    }
  };

  if (spec.dist.degenerate()) return run_sample(0);

  std::vector<Trace> mean;
  const unsigned workers = std::max(1u, spec.workers);
  std::vector<std::vector<Trace>> batch(workers);
  for (std::size_t first = 0; first < spec.n_samples; first += workers) {
    const std::size_t last = std::min(spec.n_samples, first + workers);
    parallel_for(first, last, workers,
                 [&](std::size_t s) { batch[s - first] = run_sample(s); });
    for (std::size_t s = first; s < last; ++s) {
      std::vector<Trace>& result = batch[s - first];
      if (mean.empty()) {
        mean = std::move(result);
      } else {
        for (std::size_t j = 0; j < mean.size(); ++j) accumulate(mean[j], result[j]);
      }
      result.clear();
    }
  }
  for (Trace& t : mean) finish_mean(t, spec.n_samples);
  return mean;
}

}  // namespace cascadewg
