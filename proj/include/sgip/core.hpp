#pragma once

// Shared domain types: the Eulerian bin lattice, the Lagrangian particle
// ensemble, and the piecewise-constant density field living on the lattice.
//
// Flat bin indices are 0-based and row-major with axis 0 slowest:
//   flat = ((k0 * M) + k1) * M + k2
// The same ordering is used for snapshot payloads.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgip {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 3;

/// A point or vector in up to three dimensions; unused trailing components are zero.
using Vec = std::array<double, kMaxDim>;

/// Uniform Cartesian lattice of M^d bins covering [-L, L]^d.
class GridSpec {
 public:
  GridSpec(int dim, double half_width, std::int64_t bins_per_dim);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  std::int64_t bins_per_dim() const { return bins_; }
  double bin_size() const { return bin_size_; }
  /// Δx^d.
  double bin_volume() const { return bin_volume_; }
  /// M^d.
  std::size_t num_bins() const { return num_bins_; }

  /// Per-axis bin index of a coordinate, clamped into [0, M-1].
  std::int64_t axis_index(double x) const;
  /// Lower face of bin k along any axis.
  double axis_lower(std::int64_t k) const { return -half_width_ + static_cast<double>(k) * bin_size_; }
  double axis_center(std::int64_t k) const { return -half_width_ + (static_cast<double>(k) + 0.5) * bin_size_; }

  /// Flat index -> per-axis indices (unused axes are 0).
  std::array<std::int64_t, kMaxDim> unflatten(std::size_t index) const;
  std::size_t flatten(const std::array<std::int64_t, kMaxDim>& k) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim_ == b.dim_ && a.half_width_ == b.half_width_ && a.bins_ == b.bins_;
  }

 private:
  int dim_;
  double half_width_;
  std::int64_t bins_;
  double bin_size_;
  double bin_volume_;
  std::size_t num_bins_;
};

/// Flat bin index of a position; coordinates at +L fall in the last bin.
/// Throws on non-finite coordinates.
std::size_t bin_index(std::span<const double> position, const GridSpec& grid);

/// Center of a bin. Throws when the index is out of range.
Vec bin_center(std::size_t index, const GridSpec& grid);

/// N particles sharing one mass. Positions are stored interleaved: particle i
/// occupies positions[i*d, (i+1)*d).
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  ParticleEnsemble(int dim, std::vector<double> positions, double particle_mass);

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : positions_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return positions_.empty(); }

  double particle_mass() const { return particle_mass_; }
  double total_mass() const { return total_mass_; }

  /// Sets the shared mass from the ensemble total (m = total / N) so that
  /// total_mass() returns exactly `total`.
  void set_total_mass(double total);

  std::span<const double> position(std::size_t i) const {
    return {positions_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<double> position(std::size_t i) {
    return {positions_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& positions() const { return positions_; }
  std::vector<double>& positions() { return positions_; }

 private:
  int dim_ = 0;
  std::vector<double> positions_;
  double particle_mass_ = 0.0;
  double total_mass_ = 0.0;
};

/// Piecewise-constant density on a GridSpec at time `time`.
struct DensityField {
  DensityField(GridSpec grid, double time = 0.0);
  DensityField(GridSpec grid, std::vector<double> values, double time);

  GridSpec grid;
  std::vector<double> values;
  double time = 0.0;
};

/// Σ_j u_j Δx^d, accumulated in ascending flat-index order.
double field_total_mass(const DensityField& field);

}  // namespace sgip
