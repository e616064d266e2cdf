#include "sgip/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sgip/transport.hpp"
#include "sgip/util.hpp"

namespace sgip {

std::vector<double> bin_probabilities(const DensityField& field) {
  const double mass = field_total_mass(field);
  if (!(mass > 0.0)) throw ExtinctionError("resampling: total mass is zero");
  std::vector<double> p(field.values.size());
  const double vol = field.grid.bin_volume();
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (field.values[j] < 0.0) throw Error("resampling: negative density in bin " + std::to_string(j));
    p[j] = field.values[j] * vol / mass;
  }
  return p;
}

std::vector<std::uint64_t> multinomial_draw(std::uint64_t n, std::span<const double> p, RngStream rng) {
  std::vector<std::uint64_t> counts(p.size(), 0);
  if (p.empty()) throw Error("multinomial: empty probability vector");
  // Suffix sums give the remaining probability without subtractive drift.
  std::vector<double> tail(p.size() + 1, 0.0);
  for (std::size_t j = p.size(); j-- > 0;) {
    if (!(p[j] >= 0.0)) throw Error("multinomial: negative probability");
    tail[j] = tail[j + 1] + p[j];
  }
  if (!(tail[0] > 0.0)) throw Error("multinomial: probabilities sum to zero");
  std::size_t last = p.size() - 1;
  while (p[last] == 0.0) --last;

  CounterEngine engine(rng, RngPurpose::Multinomial);
  std::uint64_t remaining = n;
  for (std::size_t j = 0; j <= last && remaining > 0; ++j) {
    if (p[j] == 0.0) continue;
    if (j == last) {
      counts[j] = remaining;
      break;
    }
    const double q = std::min(1.0, p[j] / tail[j]);
    std::binomial_distribution<std::int64_t> binom(static_cast<std::int64_t>(remaining), q);
    const auto k = static_cast<std::uint64_t>(binom(engine));
    counts[j] = k;
    remaining -= k;
  }
  return counts;
}

namespace {

// Uniform integer in [0, n) by rejection on 64-bit draws.
std::uint64_t uniform_index(CounterEngine& engine, std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine);
}

}  // namespace

ResampleResult resample_with_plan(const ParticleEnsemble& ensemble_star, std::span<const std::uint32_t> bins,
                                  const DensityField& field_next, double mass_next, RngStream rng, int workers) {
  if (!(mass_next > 0.0)) throw Error("resample: M_next must be positive");
  const GridSpec& grid = field_next.grid;
  if (ensemble_star.dim() != grid.dim()) throw Error("resample: ensemble and field dimensions differ");
  if (bins.size() != ensemble_star.size()) throw Error("resample: bin assignment does not match ensemble size");
  const double field_mass = field_total_mass(field_next);
  if (std::abs(field_mass - mass_next) > 1e-9 * std::max(field_mass, mass_next)) {
    std::ostringstream msg;
    msg << "resample: M_next=" << mass_next << " disagrees with the field mass " << field_mass;
    throw Error(msg.str());
  }

  const std::size_t n = ensemble_star.size();
  const std::size_t nbins = grid.num_bins();
  const std::size_t d = static_cast<std::size_t>(grid.dim());

  ResamplePlan plan;
  plan.probabilities = bin_probabilities(field_next);
  plan.targets = multinomial_draw(n, plan.probabilities, rng);
  plan.current = bin_counts(bins, nbins);

  const std::uint64_t drawn = std::accumulate(plan.targets.begin(), plan.targets.end(), std::uint64_t{0});
  if (drawn != n) throw Error("resample: multinomial counts do not sum to N");

  // Counting sort of particle indices by bin.
  std::vector<std::uint64_t> src_offset(nbins + 1, 0);
  std::vector<std::uint64_t> dst_offset(nbins + 1, 0);
  for (std::size_t j = 0; j < nbins; ++j) {
    src_offset[j + 1] = src_offset[j] + plan.current[j];
    dst_offset[j + 1] = dst_offset[j] + plan.targets[j];
  }
  // Positions grouped by bin, so the picks for one bin read a contiguous block.
  std::vector<double> sorted(n * d);
  const auto& in = ensemble_star.positions();
  {
    std::vector<std::uint64_t> fill(src_offset.begin(), src_offset.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(in.data() + i * d, d, sorted.data() + fill[bins[i]]++ * d);
  }

  std::vector<double> out(n * d);
  std::vector<std::vector<std::uint32_t>> scratch(static_cast<std::size_t>(std::max(workers, 1)));
  parallel_for(workers, nbins, [&](std::size_t begin, std::size_t end, int worker) {
    auto& pool = scratch[static_cast<std::size_t>(worker)];
    for (std::size_t j = begin; j < end; ++j) {
      const std::uint64_t target = plan.targets[j];
      if (target == 0) continue;
      const std::uint64_t have = plan.current[j];
      CounterEngine engine(rng, RngPurpose::ResampleBin, static_cast<std::uint64_t>(j) << 32);
      double* dst = out.data() + dst_offset[j] * d;
      const double* src = sorted.data() + src_offset[j] * d;
      auto copy_particle = [&](std::uint64_t i, std::uint64_t slot) { std::copy_n(src + i * d, d, dst + slot * d); };
      if (have > 0 && target <= have) {
        // Partial Fisher-Yates: the first `target` slots become a uniform subset.
        pool.resize(have);
        std::iota(pool.begin(), pool.end(), std::uint32_t{0});
        for (std::uint64_t k = 0; k < target; ++k) {
          const std::uint64_t pick = k + uniform_index(engine, have - k);
          std::swap(pool[k], pool[pick]);
          copy_particle(pool[k], k);
        }
      } else if (have > 0) {
        for (std::uint64_t k = 0; k < target; ++k) copy_particle(uniform_index(engine, have), k);
      } else {
        const auto cell = grid.unflatten(j);
        for (std::uint64_t k = 0; k < target; ++k) {
          for (std::size_t a = 0; a < d; ++a) {
            const double lo = grid.axis_lower(cell[a]);
            double x = lo + engine.uniform() * grid.bin_size();
            // Rounding can land on the upper face; pull it back into the bin.
            while (grid.axis_index(x) > cell[a]) x = std::nextafter(x, lo);
            dst[k * d + a] = x;
          }
        }
      }
    }
  });

  ResampleResult result{ParticleEnsemble(grid.dim(), std::move(out), 0.0), std::move(plan)};
  result.ensemble.set_total_mass(mass_next);
  return result;
}

ParticleEnsemble resample(const ParticleEnsemble& ensemble_star, const DensityField& field_next, double mass_next,
                          RngStream rng, int workers) {
  const auto bins = assign_bins(ensemble_star, field_next.grid, workers);
  return resample_with_plan(ensemble_star, bins, field_next, mass_next, rng, workers).ensemble;
}

}  // namespace sgip
