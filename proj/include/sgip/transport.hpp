#pragma once

// Particle advection-diffusion (Euler-Maruyama), reflecting walls, and the
// histogram density estimate.

#include <cstdint>
#include <span>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/flows.hpp"
#include "sgip/rng.hpp"

namespace sgip {

/// Mirror-reflects each coordinate about +-L until it lies in [-L, L].
void reflect_boundary(std::span<double> position, double half_width);

/// One Euler-Maruyama step X* = X + v(X, t) dt + sqrt(2 D dt) xi, followed by
/// reflection into [-L, L]^d. Particle i uses normal draws [i*d, (i+1)*d) of
/// the transport sequence of `rng`, so the result does not depend on `workers`.
/// Masses are unchanged. Throws if a particle position becomes non-finite.
ParticleEnsemble advect_diffuse_step(const ParticleEnsemble& ensemble, const FlowField& flow, double diffusion,
                                     double dt, double t, RngStream rng, double half_width, int workers = 1);

/// Flat bin index of every particle.
std::vector<std::uint32_t> assign_bins(const ParticleEnsemble& ensemble, const GridSpec& grid, int workers = 1);

/// Per-bin particle counts.
std::vector<std::uint64_t> bin_counts(std::span<const std::uint32_t> bins, std::size_t num_bins);

/// u_j = m * count_j / dx^d.
DensityField estimate_density(const ParticleEnsemble& ensemble, const GridSpec& grid, double time = 0.0,
                              int workers = 1);

/// Same as estimate_density, reusing precomputed bin assignments.
DensityField density_from_bins(std::span<const std::uint32_t> bins, double particle_mass, const GridSpec& grid,
                               double time = 0.0);

}  // namespace sgip
