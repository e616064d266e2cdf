#pragma once

// The particle simulation loop: initial sampling, then per step
// transport -> histogram -> reaction -> resampling.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sgip/core.hpp"
#include "sgip/flows.hpp"
#include "sgip/reactions.hpp"
#include "sgip/resampling.hpp"
#include "sgip/rng.hpp"

namespace sgip {

namespace init {
/// Indicator of an axis-aligned box; a 1D box is an interval.
struct IndicatorBox {
  int dim = 1;
  Vec lo{0.0, 0.0, 0.0};
  Vec hi{0.0, 0.0, 0.0};
};
/// Indicator of a closed ball.
struct IndicatorBall {
  int dim = 3;
  Vec center{0.0, 0.0, 0.0};
  double radius = 1.0;
};
/// Arbitrary non-negative density given on a grid (read from a snapshot).
struct Custom {
  DensityField field;
  std::string source;  // file the field came from, for config round-trips
};
}  // namespace init

using InitSpec = std::variant<init::IndicatorBox, init::IndicatorBall, init::Custom>;

int init_dimension(const InitSpec& spec);
/// M0, the integral of u0.
double initial_mass(const InitSpec& spec);
/// Throws unless the support lies in [-L, L]^d and M0 > 0.
void validate(const InitSpec& spec, int dim, double half_width);
/// u0 evaluated at a point.
double initial_density(const InitSpec& spec, std::span<const double> x);

/// Samples N positions from u0 / M0 and assigns mass M0 / N to each.
ParticleEnsemble init_particles(const InitSpec& spec, std::size_t n, RngStream rng);

struct SimConfig {
  int dim = 1;
  double half_width = 60.0;
  std::int64_t bins_per_dim = 150;
  std::uint64_t particles = 100000;
  double dt = 0.5;
  double final_time = 20.0;
  double diffusion = 1.0;
  FlowField flow = flow::Zero{};
  ReactionModel reaction = reaction::FKPP{};
  IntegratorScheme scheme = scheme::ClosedForm{};
  InitSpec initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  std::uint64_t seed = 1;
  std::uint64_t snapshot_every = 1;
  std::string output_dir;
  double u_max = 1.0;
  int workers = 1;
  std::optional<double> front_threshold;
  bool front_smoothing = false;

  GridSpec grid() const { return GridSpec(dim, half_width, bins_per_dim); }
};

/// Throws on any invariant violation. T must be a whole number of steps.
void validate(const SimConfig& config);
/// round(T / dt).
std::uint64_t step_count(double final_time, double dt);

struct SimState {
  ParticleEnsemble ensemble;
  double time = 0.0;
  std::uint64_t step = 0;
};

struct StepOutput {
  SimState next;
  /// Post-reaction field at t_{n+1}: the emitted solution.
  DensityField field;
  double mass = 0.0;
  std::size_t clamped_bins = 0;
  /// Target counts drawn for the resampling (empty when extinct).
  std::vector<std::uint64_t> targets;
  bool extinct = false;
};

/// Error raised by a pipeline stage, tagged with the step index.
class StepError : public Error {
 public:
  StepError(const std::string& what, std::uint64_t step) : Error(what), step(step) {}
  std::uint64_t step;
};

/// Advances one step. Random streams: stream id = state.step.
StepOutput sgip_step(const SimState& state, const SimConfig& config);

enum class RunStatus { Completed, Extinct };

struct DiagnosticsRow {
  std::uint64_t step = 0;
  double time = 0.0;
  double total_mass = 0.0;
  std::optional<double> front_x;
};

struct RunSummary {
  RunStatus status = RunStatus::Completed;
  std::uint64_t steps = 0;
  double final_time = 0.0;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<std::string> snapshot_files;
  /// Field emitted at the last step.
  std::optional<DensityField> final_field;
};

/// Called with (step, field) for every emitted field, including step 0.
using FieldObserver = std::function<void(std::uint64_t, const DensityField&)>;

/// Runs round(T / dt) steps. When config.output_dir is set, writes snapshots
/// every snapshot_every steps, diagnostics.csv, and manifest.txt; a failing
/// stage still leaves a manifest describing the partial output.
RunSummary sgip_run(const SimConfig& config, const FieldObserver& observer = {});

}  // namespace sgip
