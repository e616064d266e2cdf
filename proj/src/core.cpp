#include "sgip/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sgip {

GridSpec::GridSpec(int dim, double half_width, std::int64_t bins_per_dim)
    : dim_(dim), half_width_(half_width), bins_(bins_per_dim) {
  if (dim < 1 || dim > kMaxDim) throw Error("grid: dim must be 1, 2 or 3");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw Error("grid: half width L must be positive");
  if (bins_per_dim < 2) throw Error("grid: need at least 2 bins per dimension");
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) {
    if (total > std::numeric_limits<std::size_t>::max() / 8 / static_cast<std::size_t>(bins_per_dim))
      throw Error("grid: M^d bins do not fit in addressable memory");
    total *= static_cast<std::size_t>(bins_per_dim);
  }
  num_bins_ = total;
  bin_size_ = 2.0 * half_width / static_cast<double>(bins_per_dim);
  bin_volume_ = std::pow(bin_size_, dim);
}

std::int64_t GridSpec::axis_index(double x) const {
  const double k = std::floor((x + half_width_) / bin_size_);
  if (k <= 0.0) return 0;
  if (k >= static_cast<double>(bins_ - 1)) return bins_ - 1;
  return static_cast<std::int64_t>(k);
}

std::array<std::int64_t, kMaxDim> GridSpec::unflatten(std::size_t index) const {
  std::array<std::int64_t, kMaxDim> k{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    k[a] = static_cast<std::int64_t>(index % static_cast<std::size_t>(bins_));
    index /= static_cast<std::size_t>(bins_);
  }
  return k;
}

std::size_t GridSpec::flatten(const std::array<std::int64_t, kMaxDim>& k) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(k[a]);
  return flat;
}

std::size_t bin_index(std::span<const double> position, const GridSpec& grid) {
  if (static_cast<int>(position.size()) != grid.dim()) throw Error("bin_index: position dimension does not match grid");
  std::size_t flat = 0;
  for (int a = 0; a < grid.dim(); ++a) {
    if (!std::isfinite(position[a])) throw Error("bin_index: non-finite coordinate");
    flat = flat * static_cast<std::size_t>(grid.bins_per_dim()) + static_cast<std::size_t>(grid.axis_index(position[a]));
  }
  return flat;
}

Vec bin_center(std::size_t index, const GridSpec& grid) {
  if (index >= grid.num_bins()) {
    std::ostringstream msg;
    msg << "bin_center: index " << index << " out of range [0, " << grid.num_bins() << ")";
    throw Error(msg.str());
  }
  const auto k = grid.unflatten(index);
  Vec x{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a) x[a] = grid.axis_center(k[a]);
  return x;
}

ParticleEnsemble::ParticleEnsemble(int dim, std::vector<double> positions, double particle_mass)
    : dim_(dim), positions_(std::move(positions)), particle_mass_(particle_mass) {
  if (dim < 1 || dim > kMaxDim) throw Error("ensemble: dim must be 1, 2 or 3");
  if (positions_.size() % static_cast<std::size_t>(dim) != 0) throw Error("ensemble: position array is not a multiple of dim");
  if (!(particle_mass >= 0.0)) throw Error("ensemble: particle mass must be non-negative");
  total_mass_ = particle_mass_ * static_cast<double>(size());
}

void ParticleEnsemble::set_total_mass(double total) {
  if (!(total >= 0.0)) throw Error("ensemble: total mass must be non-negative");
  total_mass_ = total;
  particle_mass_ = empty() ? 0.0 : total / static_cast<double>(size());
}

DensityField::DensityField(GridSpec g, double t) : grid(g), values(g.num_bins(), 0.0), time(t) {}

DensityField::DensityField(GridSpec g, std::vector<double> v, double t) : grid(g), values(std::move(v)), time(t) {
  if (values.size() != grid.num_bins()) throw Error("density field: value count does not equal M^d");
}

double field_total_mass(const DensityField& field) {
  // Neumaier summation keeps the fixed-order sum accurate for large M^d.
  double sum = 0.0;
  double comp = 0.0;
  for (double u : field.values) {
    const double t = sum + u;
    if (std::abs(sum) >= std::abs(u))
      comp += (sum - t) + u;
    else
      comp += (u - t) + sum;
    sum = t;
  }
  return (sum + comp) * field.grid.bin_volume();
}

}  // namespace sgip
