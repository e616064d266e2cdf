#pragma once

// Explicit finite-difference reference solver for
//   u_t = -div(v u) + D lap(u) + r(u)
// on a cell-centered grid over [-L, L]^d with zero-flux walls. The advection
// sign matches the particle drift (+v).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/driver.hpp"
#include "sgip/flows.hpp"
#include "sgip/reactions.hpp"

namespace sgip {

enum class AdvectionStencil { Upwind, Central };
enum class FdmReaction { Explicit, Implicit };

struct FdmConfig {
  int dim = 1;
  double half_width = 60.0;
  double dx = 0.01;
  double dt = 4e-5;
  double diffusion = 1.0;
  FlowField flow = flow::Zero{};
  ReactionModel reaction = reaction::FKPP{};
  InitSpec initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  double final_time = 20.0;
  std::uint64_t snapshot_every = 1000;
  std::string output_dir;
  AdvectionStencil advection = AdvectionStencil::Upwind;
  FdmReaction reaction_mode = FdmReaction::Explicit;
  /// Used when reaction_mode is Implicit.
  IntegratorScheme scheme = scheme::BackwardEuler{};
  double u_max = 1.0;
  /// Bins per dimension of the grid snapshots are restricted onto; 0 keeps the
  /// native resolution.
  std::int64_t sample_bins = 0;
  /// Domain half width of the sampling grid; 0 means half_width.
  double sample_half_width = 0.0;
  std::optional<double> front_threshold;

  /// The computational grid: M = 2L/dx cells per dimension.
  GridSpec grid() const;
  /// Grid snapshots are written on.
  GridSpec output_grid() const;
};

/// Throws on invalid parameters, including the explicit stability limits
/// dt <= dx^2 / (2 d D) and dt |v|_inf / dx <= 1.
void validate(const FdmConfig& config);

/// Cell averages of the initial condition on `grid`.
DensityField discretize_initial(const InitSpec& spec, const GridSpec& grid);

/// Averages a fine field onto a coarser grid. Every coarse bin must be either
/// a union of fine cells or lie entirely outside the fine domain (read as 0).
DensityField restrict_to_grid(const DensityField& fine, const GridSpec& coarse);

/// Stepper with precomputed face velocities. Steady flows only: velocities are
/// evaluated once at t = 0.
class FdmSolver {
 public:
  explicit FdmSolver(FdmConfig config);

  const FdmConfig& config() const { return config_; }
  const GridSpec& grid() const { return grid_; }

  /// Advances `field` (on grid()) by one time step in place.
  void step(DensityField& field) { advance(field, 1); }
  /// Advances `field` by `steps` time steps in place.
  void advance(DensityField& field, std::uint64_t steps);

 private:
  void fill_ghosts(std::vector<double>& u) const;
  void sweep(const std::vector<double>& u, std::vector<double>& next) const;
  void check_finite() const;

  FdmConfig config_;
  GridSpec grid_;
  std::array<std::size_t, 3> extent_{1, 1, 1};  // padded extents
  std::array<std::size_t, 3> stride_{0, 0, 0};  // padded strides per active axis
  // Current and next state with one ghost layer per side.
  std::vector<double> padded_;
  std::vector<double> scratch_;
  // face_velocity_[a][c] is the normal velocity on the upper face of padded cell c.
  std::array<std::vector<double>, 3> face_velocity_;
  std::uint64_t steps_taken_ = 0;
};

/// One explicit step on a freshly built solver.
DensityField fdm_step(const DensityField& field, const FdmConfig& config);

struct FdmSummary {
  std::uint64_t steps = 0;
  double final_time = 0.0;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<std::string> snapshot_files;
  /// Final field on the native grid.
  std::optional<DensityField> final_field;
};

/// Marches to T. Snapshots (restricted to output_grid()) are emitted every
/// snapshot_every steps and at T; the observer receives the restricted field.
FdmSummary fdm_run(const FdmConfig& config, const FieldObserver& observer = {});

}  // namespace sgip
