#pragma once

// Error norms, front tracking, and the refinement study.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/driver.hpp"

namespace sgip {

/// sqrt(sum_j dx^d (a_j - b_j)^2). Throws if the grids differ.
double l2_error(const DensityField& a, const DensityField& b);
/// sqrt(sum_j dx^d u_j^2).
double l2_norm(const DensityField& a);
/// l2_error(a, ref) / l2_norm(ref).
double relative_l2_error(const DensityField& a, const DensityField& ref);

/// Values along `axis` through the domain center. For multi-D fields the other
/// axes are fixed at the bin containing coordinate 0.
std::vector<double> axis_trace(const DensityField& field, int axis);

/// One pass of three-point nearest-neighbour averaging (ends use the two
/// available points).
std::vector<double> smooth_trace(std::span<const double> trace);

/// Rightmost crossing from >= threshold to < threshold along the center trace,
/// linearly interpolated between bin centers. nullopt when there is no front.
std::optional<double> front_position(const DensityField& field, double threshold, int axis = 0,
                                     bool smooth = false);
/// Same, on an explicit trace with the given grid geometry.
std::optional<double> front_position(std::span<const double> trace, const GridSpec& grid, double threshold);

/// Least-squares slope of x against t. Needs at least three points.
double front_speed(std::span<const std::pair<double, double>> series);
/// Slope over the points with t in [t_begin, t_end].
double front_speed(std::span<const std::pair<double, double>> series, double t_begin, double t_end);

struct ScheduleLevel {
  double dt = 0.0;
  double dx = 0.0;
  std::uint64_t particles = 0;
};

/// A refinement path with kappa = dx/dt and nu = 1/(sqrt(N dx^d) dt)
/// non-increasing from level to level.
class ConvergenceSchedule {
 public:
  ConvergenceSchedule(std::vector<ScheduleLevel> levels, int dim);

  const std::vector<ScheduleLevel>& levels() const { return levels_; }
  int dim() const { return dim_; }
  double kappa(std::size_t level) const;
  double nu(std::size_t level) const;

 private:
  std::vector<ScheduleLevel> levels_;
  int dim_;
};

struct ConvergenceRow {
  std::size_t level = 0;
  ScheduleLevel params;
  std::uint64_t seed = 0;
  double l2 = 0.0;
};

struct ConvergenceLevelSummary {
  std::size_t level = 0;
  ScheduleLevel params;
  double mean_l2 = 0.0;
  double kappa = 0.0;
  double nu = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceLevelSummary> levels;
  bool monotone = true;
};

/// Runs the base configuration at every level and seed and compares the final
/// field with `reference` restricted onto each level's grid. The reference must
/// be at least four times finer than the finest level.
ConvergenceTable convergence_study(const SimConfig& base, const ConvergenceSchedule& schedule,
                                   std::span<const std::uint64_t> seeds, const DensityField& reference,
                                   int workers = 1);

}  // namespace sgip
