#include "sgip/transport.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sgip/util.hpp"

namespace sgip {

void reflect_boundary(std::span<double> position, double half_width) {
  const double L = half_width;
  for (double& x : position) {
    while (x > L || x < -L) x = x > L ? 2.0 * L - x : -2.0 * L - x;
  }
}

namespace {

constexpr std::size_t kChunk = 2048;

template <class Flow>
void advect_range(const Flow& flow, std::span<double> pos, int dim, std::size_t first_particle, double diffusion,
                  double dt, double t, RngStream rng, double L) {
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t n = pos.size() / d;
  const double sigma = std::sqrt(2.0 * diffusion * dt);
  std::vector<double> xi(kChunk * d);
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t count = std::min(kChunk, n - start);
    std::span<double> noise(xi.data(), count * d);
    if (sigma > 0.0) fill_normals(rng, RngPurpose::Transport, (first_particle + start) * d, noise);
    for (std::size_t i = 0; i < count; ++i) {
      std::span<double> x = pos.subspan((start + i) * d, d);
      const Vec v = velocity(flow, std::span<const double>(x.data(), d), t);
      bool finite = true;
      for (std::size_t a = 0; a < d; ++a) {
        x[a] += v[a] * dt;
        if (sigma > 0.0) x[a] += sigma * noise[i * d + a];
        finite = finite && std::isfinite(x[a]);
      }
      if (!finite)
        throw Error("transport: particle " + std::to_string(first_particle + start + i) + " left the finite range");
      reflect_boundary(x, L);
    }
  }
}

}  // namespace

ParticleEnsemble advect_diffuse_step(const ParticleEnsemble& ensemble, const FlowField& flow, double diffusion,
                                     double dt, double t, RngStream rng, double half_width, int workers) {
  if (ensemble.empty()) throw Error("transport: empty ensemble");
  if (!(dt > 0.0)) throw Error("transport: dt must be positive");
  if (!(diffusion >= 0.0)) throw Error("transport: diffusion must be non-negative");
  check_flow_dimension(flow, ensemble.dim());
  ParticleEnsemble out = ensemble;
  const std::size_t d = static_cast<std::size_t>(ensemble.dim());
  std::vector<double>& pos = out.positions();
  parallel_for(workers, ensemble.size(), [&](std::size_t begin, std::size_t end, int) {
    std::span<double> slice(pos.data() + begin * d, (end - begin) * d);
    std::visit([&](const auto& f) { advect_range(f, slice, ensemble.dim(), begin, diffusion, dt, t, rng, half_width); },
               flow);
  });
  return out;
}

std::vector<std::uint32_t> assign_bins(const ParticleEnsemble& ensemble, const GridSpec& grid, int workers) {
  if (ensemble.dim() != grid.dim()) throw Error("assign_bins: ensemble and grid dimensions differ");
  if (grid.num_bins() > std::numeric_limits<std::uint32_t>::max()) throw Error("assign_bins: too many bins");
  std::vector<std::uint32_t> bins(ensemble.size());
  parallel_for(workers, ensemble.size(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) bins[i] = static_cast<std::uint32_t>(bin_index(ensemble.position(i), grid));
  });
  return bins;
}

std::vector<std::uint64_t> bin_counts(std::span<const std::uint32_t> bins, std::size_t num_bins) {
  std::vector<std::uint64_t> counts(num_bins, 0);
  for (std::uint32_t b : bins) ++counts[b];
  return counts;
}

DensityField density_from_bins(std::span<const std::uint32_t> bins, double particle_mass, const GridSpec& grid,
                               double time) {
  const auto counts = bin_counts(bins, grid.num_bins());
  DensityField field(grid, time);
  const double scale = particle_mass / grid.bin_volume();
  for (std::size_t j = 0; j < counts.size(); ++j) field.values[j] = static_cast<double>(counts[j]) * scale;
  return field;
}

DensityField estimate_density(const ParticleEnsemble& ensemble, const GridSpec& grid, double time, int workers) {
  const auto bins = assign_bins(ensemble, grid, workers);
  return density_from_bins(bins, ensemble.particle_mass(), grid, time);
}

}  // namespace sgip
