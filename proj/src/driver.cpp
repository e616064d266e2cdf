#include "sgip/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "sgip/diagnostics.hpp"
#include "sgip/snapshot.hpp"
#include "sgip/transport.hpp"
#include "sgip/util.hpp"

namespace sgip {

int init_dimension(const InitSpec& spec) {
  return std::visit(Overloaded{[](const init::IndicatorBox& b) { return b.dim; },
                               [](const init::IndicatorBall& b) { return b.dim; },
                               [](const init::Custom& c) { return c.field.grid.dim(); }},
                    spec);
}

double initial_mass(const InitSpec& spec) {
  return std::visit(Overloaded{[](const init::IndicatorBox& b) {
                                 double vol = 1.0;
                                 for (int a = 0; a < b.dim; ++a) vol *= std::max(0.0, b.hi[a] - b.lo[a]);
                                 return vol;
                               },
                               [](const init::IndicatorBall& b) {
                                 const double r = b.radius;
                                 switch (b.dim) {
                                   case 1: return 2.0 * r;
                                   case 2: return std::numbers::pi * r * r;
                                   default: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
                                 }
                               },
                               [](const init::Custom& c) { return field_total_mass(c.field); }},
                    spec);
}

void validate(const InitSpec& spec, int dim, double half_width) {
  if (init_dimension(spec) != dim) throw Error("init: initial condition dimension does not match dim");
  const double L = half_width;
  std::visit(Overloaded{[&](const init::IndicatorBox& b) {
                          for (int a = 0; a < b.dim; ++a) {
                            if (!(b.hi[a] > b.lo[a])) throw Error("init: box has zero volume");
                            if (b.lo[a] < -L || b.hi[a] > L) throw Error("init: box extends outside [-L, L]^d");
                          }
                        },
                        [&](const init::IndicatorBall& b) {
                          if (!(b.radius > 0.0)) throw Error("init: ball radius must be positive");
                          for (int a = 0; a < b.dim; ++a)
                            if (b.center[a] - b.radius < -L || b.center[a] + b.radius > L)
                              throw Error("init: ball extends outside [-L, L]^d");
                        },
                        [&](const init::Custom& c) {
                          if (c.field.grid.half_width() > L * (1.0 + 1e-12))
                            throw Error("init: custom field extends outside [-L, L]^d");
                          for (double u : c.field.values)
                            if (!(u >= 0.0) || !std::isfinite(u)) throw Error("init: custom field must be finite and >= 0");
                        }},
             spec);
  if (!(initial_mass(spec) > 0.0)) throw Error("init: initial mass M0 must be positive");
}

double initial_density(const InitSpec& spec, std::span<const double> x) {
  return std::visit(Overloaded{[&](const init::IndicatorBox& b) {
                                 for (int a = 0; a < b.dim; ++a)
                                   if (x[a] < b.lo[a] || x[a] > b.hi[a]) return 0.0;
                                 return 1.0;
                               },
                               [&](const init::IndicatorBall& b) {
                                 double r2 = 0.0;
                                 for (int a = 0; a < b.dim; ++a) r2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
                                 return r2 <= b.radius * b.radius ? 1.0 : 0.0;
                               },
                               [&](const init::Custom& c) {
                                 const auto& g = c.field.grid;
                                 for (int a = 0; a < g.dim(); ++a)
                                   if (std::abs(x[a]) > g.half_width()) return 0.0;
                                 return c.field.values[bin_index(x, g)];
                               }},
                    spec);
}

ParticleEnsemble init_particles(const InitSpec& spec, std::size_t n, RngStream rng) {
  if (n == 0) throw Error("init: need at least one particle");
  const int dim = init_dimension(spec);
  const std::size_t d = static_cast<std::size_t>(dim);
  const double mass = initial_mass(spec);
  if (!(mass > 0.0)) throw Error("init: initial mass M0 must be positive");
  std::vector<double> pos(n * d);
  CounterEngine engine(rng, RngPurpose::Init);

  std::visit(Overloaded{[&](const init::IndicatorBox& b) {
                          for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t a = 0; a < d; ++a)
                              pos[i * d + a] = b.lo[a] + engine.uniform() * (b.hi[a] - b.lo[a]);
                        },
                        [&](const init::IndicatorBall& b) {
                          const std::uint64_t budget = 10000 * static_cast<std::uint64_t>(n);
                          std::uint64_t proposals = 0;
                          const double r2 = b.radius * b.radius;
                          for (std::size_t i = 0; i < n; ++i) {
                            for (;;) {
                              if (++proposals > budget) throw Error("init: rejection sampler exceeded 10^4 N proposals");
                              double s = 0.0;
                              for (std::size_t a = 0; a < d; ++a) {
                                const double off = (2.0 * engine.uniform() - 1.0) * b.radius;
                                pos[i * d + a] = b.center[a] + off;
                                s += off * off;
                              }
                              if (s <= r2) break;
                            }
                          }
                        },
                        [&](const init::Custom& c) {
                          const auto& g = c.field.grid;
                          std::vector<double> cdf(c.field.values.size());
                          double acc = 0.0;
                          for (std::size_t j = 0; j < cdf.size(); ++j) cdf[j] = (acc += c.field.values[j]);
                          for (std::size_t i = 0; i < n; ++i) {
                            const double target = engine.uniform() * acc;
                            auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
                            std::size_t j = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
                                it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size() - 1)));
                            while (c.field.values[j] == 0.0 && j > 0) --j;
                            const auto cell = g.unflatten(j);
                            for (std::size_t a = 0; a < d; ++a)
                              pos[i * d + a] = g.axis_lower(cell[a]) + engine.uniform() * g.bin_size();
                          }
                        }},
             spec);

  ParticleEnsemble out(dim, std::move(pos), 0.0);
  out.set_total_mass(mass);
  return out;
}

std::uint64_t step_count(double final_time, double dt) {
  const double ratio = final_time / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-6 * std::max(1.0, ratio))
    throw Error("config: T / dt must be a whole number of steps");
  return static_cast<std::uint64_t>(steps);
}

void validate(const SimConfig& c) {
  GridSpec grid = c.grid();
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw Error("config: dt must be positive");
  if (!(c.final_time >= 0.0) || !std::isfinite(c.final_time)) throw Error("config: T must be non-negative");
  step_count(c.final_time, c.dt);
  if (c.particles < 1) throw Error("config: N must be at least 1");
  if (c.particles > std::numeric_limits<std::uint32_t>::max()) throw Error("config: N too large");
  if (!(c.diffusion >= 0.0)) throw Error("config: D must be non-negative");
  if (c.snapshot_every < 1) throw Error("config: snapshot_every must be at least 1");
  if (!(c.u_max > 0.0)) throw Error("config: u_max must be positive");
  if (c.workers < 1) throw Error("config: workers must be at least 1");
  if (c.front_threshold && !(*c.front_threshold > 0.0 && *c.front_threshold < 1.0))
    throw Error("config: front threshold must lie in (0, 1)");
  check_flow_dimension(c.flow, c.dim);
  validate(c.reaction);
  validate(c.scheme);
  if (std::holds_alternative<scheme::ClosedForm>(c.scheme) && !has_closed_form(c.reaction))
    throw Error("config: scheme closed_form requires reaction fkpp or linear");
  validate(c.initial, c.dim, grid.half_width());
}

StepOutput sgip_step(const SimState& state, const SimConfig& config) {
  const GridSpec grid = config.grid();
  const RngStream rng{config.seed, state.step};
  const double t_next = state.time + config.dt;
  try {
    ParticleEnsemble moved = advect_diffuse_step(state.ensemble, config.flow, config.diffusion, config.dt, state.time,
                                                 rng, config.half_width, config.workers);
    const auto bins = assign_bins(moved, grid, config.workers);
    const DensityField u_star = density_from_bins(bins, moved.particle_mass(), grid, t_next);
    ReactionOutcome reacted =
        integrate_reaction_field(u_star, config.reaction, config.scheme, config.dt, config.u_max, config.workers);

    StepOutput out{SimState{}, std::move(reacted.field), reacted.mass, reacted.clamped_bins, {}, false};
    if (!(out.mass > 0.0)) {
      out.extinct = true;
      out.next = SimState{std::move(moved), t_next, state.step + 1};
      return out;
    }
    ResampleResult rs = resample_with_plan(moved, bins, out.field, out.mass, rng, config.workers);
    out.targets = std::move(rs.plan.targets);
    out.next = SimState{std::move(rs.ensemble), t_next, state.step + 1};
    return out;
  } catch (const StepError&) {
    throw;
  } catch (const std::exception& e) {
    throw StepError("step " + std::to_string(state.step) + ": " + e.what(), state.step);
  }
}

namespace {

std::optional<double> maybe_front(const SimConfig& c, const DensityField& field) {
  if (!c.front_threshold) return std::nullopt;
  return front_position(field, *c.front_threshold, 0, c.front_smoothing);
}

void write_manifest(const std::filesystem::path& dir, const RunSummary& summary, const std::string& status,
                    const std::string& message) {
  std::ofstream out(dir / "manifest.txt");
  out << "status=" << status << "\n";
  out << "steps=" << summary.steps << "\n";
  out << "final_time=" << summary.final_time << "\n";
  if (!message.empty()) out << "message=" << message << "\n";
  out << "diagnostics=diagnostics.csv\n";
  for (const auto& f : summary.snapshot_files) out << "snapshot=" << f << "\n";
}

}  // namespace

RunSummary sgip_run(const SimConfig& config, const FieldObserver& observer) {
  validate(config);
  const GridSpec grid = config.grid();
  const std::uint64_t n_steps = step_count(config.final_time, config.dt);
  const bool writing = !config.output_dir.empty();
  const std::filesystem::path dir(config.output_dir);
  if (writing) std::filesystem::create_directories(dir);

  RunSummary summary;
  auto emit = [&](std::uint64_t step, const DensityField& field, double mass) {
    summary.diagnostics.push_back({step, field.time, mass, maybe_front(config, field)});
    if (observer) observer(step, field);
    if (writing && (step % config.snapshot_every == 0 || step == n_steps)) {
      const std::string name = snapshot_filename(step);
      write_snapshot(field, Producer::SGIP, dir / name);
      summary.snapshot_files.push_back(name);
    }
  };
  auto flush = [&](const std::string& status, const std::string& message) {
    if (!writing) return;
    write_diagnostics_csv(dir / "diagnostics.csv", summary.diagnostics, config.front_threshold.has_value());
    write_manifest(dir, summary, status, message);
  };

  try {
    SimState state{init_particles(config.initial, config.particles, RngStream{config.seed, 0}), 0.0, 0};
    DensityField initial = estimate_density(state.ensemble, grid, 0.0, config.workers);
    emit(0, initial, state.ensemble.total_mass());
    summary.final_field = std::move(initial);

    for (std::uint64_t n = 0; n < n_steps; ++n) {
      StepOutput out = sgip_step(state, config);
      // Accumulating t += dt drifts; stamp the exact multiple instead.
      const double t = static_cast<double>(n + 1) * config.dt;
      out.field.time = t;
      out.next.time = t;
      summary.steps = n + 1;
      summary.final_time = t;
      emit(n + 1, out.field, out.mass);
      summary.final_field = std::move(out.field);
      if (out.extinct) {
        summary.status = RunStatus::Extinct;
        break;
      }
      state = std::move(out.next);
    }
  } catch (const std::exception& e) {
    flush("error", e.what());
    throw;
  }
  flush(summary.status == RunStatus::Completed ? "completed" : "extinct", "");
  return summary;
}

}  // namespace sgip
