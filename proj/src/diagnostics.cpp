#include "sgip/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sgip/fdm.hpp"
#include "sgip/util.hpp"

namespace sgip {

double l2_error(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw Error("l2_error: fields live on different grids");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    const double diff = a.values[j] - b.values[j];
    sum += diff * diff;
  }
  return std::sqrt(sum * a.grid.bin_volume());
}

double l2_norm(const DensityField& a) {
  double sum = 0.0;
  for (double u : a.values) sum += u * u;
  return std::sqrt(sum * a.grid.bin_volume());
}

double relative_l2_error(const DensityField& a, const DensityField& ref) {
  const double norm = l2_norm(ref);
  if (!(norm > 0.0)) throw Error("relative_l2_error: reference field is zero");
  return l2_error(a, ref) / norm;
}

std::vector<double> axis_trace(const DensityField& field, int axis) {
  const GridSpec& g = field.grid;
  if (axis < 0 || axis >= g.dim()) throw Error("axis_trace: axis out of range");
  const std::int64_t m = g.bins_per_dim();
  std::array<std::int64_t, kMaxDim> k{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) k[a] = g.axis_index(0.0);
  std::vector<double> trace(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    k[axis] = i;
    trace[static_cast<std::size_t>(i)] = field.values[g.flatten(k)];
  }
  return trace;
}

std::vector<double> smooth_trace(std::span<const double> trace) {
  std::vector<double> out(trace.size());
  const std::size_t n = trace.size();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = trace[i];
    int count = 1;
    if (i > 0) sum += trace[i - 1], ++count;
    if (i + 1 < n) sum += trace[i + 1], ++count;
    out[i] = sum / count;
  }
  return out;
}

std::optional<double> front_position(std::span<const double> trace, const GridSpec& grid, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("front_position: threshold must lie in (0, 1)");
  if (trace.size() < 2) return std::nullopt;
  for (std::size_t i = trace.size() - 1; i-- > 0;) {
    if (trace[i] >= threshold && trace[i + 1] < threshold) {
      const double x0 = grid.axis_center(static_cast<std::int64_t>(i));
      const double frac = (trace[i] - threshold) / (trace[i] - trace[i + 1]);
      return x0 + frac * grid.bin_size();
    }
  }
  return std::nullopt;
}

std::optional<double> front_position(const DensityField& field, double threshold, int axis, bool smooth) {
  auto trace = axis_trace(field, axis);
  if (smooth) trace = smooth_trace(trace);
  return front_position(trace, field.grid, threshold);
}

double front_speed(std::span<const std::pair<double, double>> series) {
  if (series.size() < 3) throw Error("front_speed: need at least three points");
  const double n = static_cast<double>(series.size());
  double mt = 0.0, mx = 0.0;
  for (const auto& [t, x] : series) mt += t, mx += x;
  mt /= n;
  mx /= n;
  double stt = 0.0, stx = 0.0;
  for (const auto& [t, x] : series) {
    stt += (t - mt) * (t - mt);
    stx += (t - mt) * (x - mx);
  }
  if (!(stt > 0.0)) throw Error("front_speed: all times are equal");
  return stx / stt;
}

double front_speed(std::span<const std::pair<double, double>> series, double t_begin, double t_end) {
  std::vector<std::pair<double, double>> window;
  for (const auto& p : series)
    if (p.first >= t_begin - 1e-12 && p.first <= t_end + 1e-12) window.push_back(p);
  return front_speed(window);
}

ConvergenceSchedule::ConvergenceSchedule(std::vector<ScheduleLevel> levels, int dim)
    : levels_(std::move(levels)), dim_(dim) {
  if (levels_.empty()) throw Error("schedule: needs at least one level");
  if (dim < 1 || dim > kMaxDim) throw Error("schedule: dim must be 1, 2 or 3");
  for (const auto& l : levels_)
    if (!(l.dt > 0.0) || !(l.dx > 0.0) || l.particles < 1) throw Error("schedule: dt, dx and N must be positive");
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    if (kappa(i) > kappa(i - 1) * (1.0 + 1e-12))
      throw Error("schedule: kappa = dx/dt must be non-increasing (level " + std::to_string(i) + ")");
    if (nu(i) > nu(i - 1) * (1.0 + 1e-12))
      throw Error("schedule: nu = 1/(sqrt(N dx^d) dt) must be non-increasing (level " + std::to_string(i) + ")");
  }
}

double ConvergenceSchedule::kappa(std::size_t level) const { return levels_.at(level).dx / levels_.at(level).dt; }

double ConvergenceSchedule::nu(std::size_t level) const {
  const auto& l = levels_.at(level);
  return 1.0 / (std::sqrt(static_cast<double>(l.particles) * std::pow(l.dx, dim_)) * l.dt);
}

ConvergenceTable convergence_study(const SimConfig& base, const ConvergenceSchedule& schedule,
                                   std::span<const std::uint64_t> seeds, const DensityField& reference, int workers) {
  if (seeds.empty()) throw Error("convergence: need at least one seed");
  if (schedule.dim() != base.dim) throw Error("convergence: schedule and config dimensions differ");
  if (std::abs(reference.time - base.final_time) > 1e-9 * std::max(1.0, base.final_time))
    throw Error("convergence: reference time does not match the final time T");
  const auto& levels = schedule.levels();
  double finest = levels.front().dx;
  for (const auto& l : levels) finest = std::min(finest, l.dx);
  if (reference.grid.bin_size() > finest / 4.0 * (1.0 + 1e-9))
    throw Error("convergence: reference must be at least 4x finer than the finest level");

  std::vector<SimConfig> configs;
  std::vector<DensityField> refs;
  for (const auto& l : levels) {
    SimConfig c = base;
    c.dt = l.dt;
    c.particles = l.particles;
    const double m = 2.0 * base.half_width / l.dx;
    c.bins_per_dim = static_cast<std::int64_t>(std::llround(m));
    if (std::abs(m - static_cast<double>(c.bins_per_dim)) > 1e-9 * m)
      throw Error("convergence: 2L/dx must be a whole number of bins at every level");
    c.output_dir.clear();
    c.workers = 1;
    validate(c);
    refs.push_back(restrict_to_grid(reference, c.grid()));
    configs.push_back(std::move(c));
  }

  ConvergenceTable table;
  table.rows.resize(levels.size() * seeds.size());
  // Each (level, seed) run is independent; rows are keyed by position.
  parallel_for(workers, table.rows.size(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t li = r / seeds.size();
      SimConfig c = configs[li];
      c.seed = seeds[r % seeds.size()];
      const RunSummary run = sgip_run(c);
      table.rows[r] = ConvergenceRow{li, levels[li], c.seed, l2_error(*run.final_field, refs[li])};
    }
  });

  for (std::size_t li = 0; li < levels.size(); ++li) {
    double sum = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) sum += table.rows[li * seeds.size() + s].l2;
    table.levels.push_back(
        {li, levels[li], sum / static_cast<double>(seeds.size()), schedule.kappa(li), schedule.nu(li)});
    if (li > 0 && table.levels[li].mean_l2 > table.levels[li - 1].mean_l2) table.monotone = false;
  }
  return table;
}

}  // namespace sgip
