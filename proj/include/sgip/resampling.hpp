#pragma once

// Genetic resampling: redistribute N particles over bins in proportion to the
// post-reaction bin masses.

#include <cstdint>
#include <span>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/rng.hpp"

namespace sgip {

/// Thrown when the field carries no mass; the population is extinct.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

/// p_j = u_j dx^d / M. Throws ExtinctionError if the total mass is zero.
std::vector<double> bin_probabilities(const DensityField& field);

/// Multinomial(N, p) by sequential conditional binomials.
std::vector<std::uint64_t> multinomial_draw(std::uint64_t n, std::span<const double> p, RngStream rng);

struct ResamplePlan {
  std::vector<double> probabilities;
  /// Target counts n_j, summing to N.
  std::vector<std::uint64_t> targets;
  /// Current counts c_j of the input ensemble.
  std::vector<std::uint64_t> current;
};

struct ResampleResult {
  ParticleEnsemble ensemble;
  ResamplePlan plan;
};

/// Draws target counts n_j ~ Multinomial(N, p) and fills each bin from its
/// current occupants: a uniform subset without replacement when n_j <= c_j,
/// uniform picks with replacement when n_j > c_j, and uniform positions inside
/// the bin box when c_j = 0. Output particles are grouped by ascending bin and
/// carry mass M_next / N. `bins` are the flat bin indices of `ensemble_star`.
ResampleResult resample_with_plan(const ParticleEnsemble& ensemble_star, std::span<const std::uint32_t> bins,
                                  const DensityField& field_next, double mass_next, RngStream rng, int workers = 1);

ParticleEnsemble resample(const ParticleEnsemble& ensemble_star, const DensityField& field_next, double mass_next,
                          RngStream rng, int workers = 1);

}  // namespace sgip
