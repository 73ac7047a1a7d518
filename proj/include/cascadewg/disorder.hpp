// disorder.hpp - thermal fluctuations of the forward coupling strength.
//
// Each atom draws a static beta_f from a Gaussian truncated at zero; the
// model prediction is the average over many such draws. Random numbers come
// from a counter-based generator so every (seed, sample) pair owns a fixed,
// non-overlapping block of the counter space.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "cascadewg/cascade.hpp"

namespace cascadewg {

/// Gaussian(mean, sigma) truncated to [0, inf) and renormalised. mean and
/// sigma are the parameters of the untruncated Gaussian.
struct BetaDistribution {
  double mean = 0.0108;
  double sigma = 0.0065;

  void validate() const;
  bool degenerate() const { return sigma == 0.0; }
  /// Probability mass the untruncated Gaussian puts below zero.
  double truncated_mass() const;
};

/// SplitMix64 output function evaluated at (key, counter). Stream s of a
/// seed owns counters [s * 2^40, (s + 1) * 2^40); the mixer is a bijection,
/// so distinct counters never produce the same internal state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr unsigned stream_bits = 40;
  static constexpr std::uint64_t stream_length = std::uint64_t{1} << stream_bits;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal deviate (Marsaglia polar method; uses only +, *, sqrt, log).
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t base_;
  std::uint64_t counter_;
};

/// Bookkeeping of the rejection sampler.
struct SamplerStats {
  std::uint64_t proposals = 0;
  std::uint64_t rejections = 0;
};

/// One beta_f draw by rejection of negative Gaussian proposals.
double sample_beta(const BetaDistribution& dist, CounterRng& rng, SamplerStats* stats = nullptr);

/// Couplings of an n-atom chain for Monte Carlo sample `sample_index`.
std::vector<double> draw_chain(const BetaDistribution& dist, std::size_t n_atoms,
                               std::uint64_t seed, std::uint64_t sample_index);

struct MonteCarloSpec {
  std::size_t n_atoms = 300;
  BetaDistribution dist;
  std::size_t n_samples = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Elementwise mean over n_samples independent chains of every trace column
/// (and of the per-atom diagnostics when requested). Samples are reduced in
/// index order, so the result does not depend on the worker count. With
/// sigma = 0 all samples coincide and a single simulation is returned.
/// An IntegrationError from any sample is rethrown with the sample index in
/// its reason.
std::vector<Trace> monte_carlo_average(const ChainConfig& base, const TimeGrid& grid,
                                       const MonteCarloSpec& spec,
                                       const SimulationOptions& options = {});

/// Maps one chain to its traces (one per recorded prefix).
using ChainSimulator = std::function<std::vector<Trace>(const ChainConfig&)>;

/// Same averaging with a caller-supplied simulator, e.g. an oracle.
std::vector<Trace> monte_carlo_average(const ChainConfig& base, const MonteCarloSpec& spec,
                                       const ChainSimulator& simulator);

}  // namespace cascadewg
