#include "sgip/fdm.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "sgip/diagnostics.hpp"
#include "sgip/snapshot.hpp"
#include "sgip/util.hpp"

namespace sgip {

namespace {

// Far-field tails decay into the subnormal range, where arithmetic is slow on
// x86. Flush-to-zero changes only values below 2.2e-308.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);  // FTZ | DAZ
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

std::int64_t cells_for(double half_width, double dx) {
  const double m = 2.0 * half_width / dx;
  const double rounded = std::round(m);
  if (!(rounded >= 2.0) || std::abs(m - rounded) > 1e-9 * m) throw Error("fdm: 2L/dx must be a whole number of cells");
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

GridSpec FdmConfig::grid() const { return GridSpec(dim, half_width, cells_for(half_width, dx)); }

GridSpec FdmConfig::output_grid() const {
  if (sample_bins == 0) return grid();
  return GridSpec(dim, sample_half_width > 0.0 ? sample_half_width : half_width, sample_bins);
}

void validate(const FdmConfig& c) {
  const GridSpec g = c.grid();
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw Error("fdm: dt must be positive");
  if (!(c.diffusion >= 0.0)) throw Error("fdm: D must be non-negative");
  if (!(c.final_time >= 0.0)) throw Error("fdm: T must be non-negative");
  step_count(c.final_time, c.dt);
  if (c.snapshot_every < 1) throw Error("fdm: snapshot_every must be at least 1");
  check_flow_dimension(c.flow, c.dim);
  validate(c.reaction);
  if (c.reaction_mode == FdmReaction::Implicit) {
    validate(c.scheme);
    if (std::holds_alternative<scheme::ClosedForm>(c.scheme) && !has_closed_form(c.reaction))
      throw Error("fdm: closed_form scheme requires reaction fkpp or linear");
  }
  validate(c.initial, c.dim, c.half_width);
  const double dx = g.bin_size();
  if (c.diffusion > 0.0) {
    const double limit = dx * dx / (2.0 * c.dim * c.diffusion);
    if (c.dt > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "fdm: unstable, dt=" << c.dt << " exceeds dx^2/(2 d D)=" << limit;
      throw Error(msg.str());
    }
  }
  const double courant = c.dt * flow_speed_bound(c.flow) / dx;
  if (courant > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "fdm: unstable, advective Courant number " << courant << " exceeds 1";
    throw Error(msg.str());
  }
  // The cell's own coefficient in the explicit update must stay non-negative.
  const double self = c.dt * (2.0 * c.dim * c.diffusion / (dx * dx) + c.dim * flow_speed_bound(c.flow) / dx);
  if (self > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "fdm: unstable, dt (2 d D / dx^2 + d |v| / dx) = " << self << " exceeds 1";
    throw Error(msg.str());
  }
  if (c.sample_bins != 0) restrict_to_grid(DensityField(g), c.output_grid());
}

DensityField discretize_initial(const InitSpec& spec, const GridSpec& grid) {
  DensityField field(grid);
  const int d = grid.dim();
  const double dx = grid.bin_size();
  if (const auto* box = std::get_if<init::IndicatorBox>(&spec)) {
    // Exact cell averages: product of per-axis overlap fractions.
    std::array<std::vector<double>, kMaxDim> frac;
    for (int a = 0; a < d; ++a) {
      frac[a].resize(static_cast<std::size_t>(grid.bins_per_dim()));
      for (std::int64_t k = 0; k < grid.bins_per_dim(); ++k) {
        const double lo = grid.axis_lower(k);
        const double overlap = std::min(lo + dx, box->hi[a]) - std::max(lo, box->lo[a]);
        frac[a][static_cast<std::size_t>(k)] = std::clamp(overlap / dx, 0.0, 1.0);
      }
    }
    for (std::size_t j = 0; j < field.values.size(); ++j) {
      const auto k = grid.unflatten(j);
      double v = 1.0;
      for (int a = 0; a < d; ++a) v *= frac[a][static_cast<std::size_t>(k[a])];
      field.values[j] = v;
    }
    return field;
  }
  // Midpoint sub-sampling with 8 points per axis.
  constexpr int kSub = 8;
  std::array<std::int64_t, kMaxDim> klo{0, 0, 0}, khi{0, 0, 0};
  if (const auto* ball = std::get_if<init::IndicatorBall>(&spec)) {
    for (int a = 0; a < d; ++a) {
      klo[a] = grid.axis_index(ball->center[a] - ball->radius);
      khi[a] = grid.axis_index(ball->center[a] + ball->radius);
    }
  } else {
    for (int a = 0; a < d; ++a) khi[a] = grid.bins_per_dim() - 1;
  }
  const int samples = d == 1 ? kSub : d == 2 ? kSub * kSub : kSub * kSub * kSub;
  std::array<std::int64_t, kMaxDim> k = klo;
  for (;;) {
    double sum = 0.0;
    Vec x{0.0, 0.0, 0.0};
    for (int s = 0; s < samples; ++s) {
      int rest = s;
      for (int a = 0; a < d; ++a) {
        x[a] = grid.axis_lower(k[a]) + (static_cast<double>(rest % kSub) + 0.5) * dx / kSub;
        rest /= kSub;
      }
      sum += initial_density(spec, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    }
    field.values[grid.flatten(k)] = sum / samples;
    int a = d - 1;
    while (a >= 0 && ++k[a] > khi[a]) {
      k[a] = klo[a];
      --a;
    }
    if (a < 0) break;
  }
  return field;
}

DensityField restrict_to_grid(const DensityField& fine, const GridSpec& coarse) {
  const GridSpec& fg = fine.grid;
  if (fg.dim() != coarse.dim()) throw Error("restrict: dimensions differ");
  const double ratio_d = coarse.bin_size() / fg.bin_size();
  const auto ratio = static_cast<std::int64_t>(std::llround(ratio_d));
  if (ratio < 1 || std::abs(ratio_d - static_cast<double>(ratio)) > 1e-9 * ratio_d)
    throw Error("restrict: coarse bin size must be a whole multiple of the fine cell size");
  const double offset_d = (fg.half_width() - coarse.half_width()) / fg.bin_size();
  const auto offset = static_cast<std::int64_t>(std::llround(offset_d));
  if (std::abs(offset_d - static_cast<double>(offset)) > 1e-6)
    throw Error("restrict: grids are not aligned");
  // Coarse bin k covers fine cells [k*ratio + offset, (k+1)*ratio + offset).
  const int d = fg.dim();
  const std::int64_t mf = fg.bins_per_dim();
  DensityField out(coarse, fine.time);
  const double inv = 1.0 / std::pow(static_cast<double>(ratio), d);
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const auto kc = coarse.unflatten(j);
    std::array<std::int64_t, kMaxDim> lo{0, 0, 0};
    bool outside = false;
    for (int a = 0; a < d; ++a) {
      lo[a] = kc[a] * ratio + offset;
      const std::int64_t hi = lo[a] + ratio;
      if (hi <= 0 || lo[a] >= mf) {
        outside = true;
      } else if (lo[a] < 0 || hi > mf) {
        throw Error("restrict: a coarse bin straddles the fine domain boundary");
      }
    }
    if (outside) continue;
    double sum = 0.0;
    std::array<std::int64_t, kMaxDim> k = lo;
    for (;;) {
      sum += fine.values[fg.flatten(k)];
      int a = d - 1;
      while (a >= 0 && ++k[a] >= lo[a] + ratio) {
        k[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    out.values[j] = sum * inv;
  }
  return out;
}

FdmSolver::FdmSolver(FdmConfig config) : config_(std::move(config)), grid_(config_.grid()) {
  validate(config_);
  const int d = grid_.dim();
  const auto m = static_cast<std::size_t>(grid_.bins_per_dim());
  for (int a = 0; a < d; ++a) extent_[a] = m + 2;
  std::size_t s = 1;
  for (int a = d - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= extent_[a];
  }
  padded_.assign(s, 0.0);
  scratch_.assign(s, 0.0);
  const double L = grid_.half_width();
  const double dx = grid_.bin_size();
  for (int a = 0; a < d; ++a) {
    auto& fv = face_velocity_[a];
    fv.assign(s, 0.0);
    for (std::size_t c = 0; c < s; ++c) {
      std::size_t rest = c;
      std::array<std::size_t, kMaxDim> p{0, 0, 0};
      for (int b = 0; b < d; ++b) {
        p[b] = rest / stride_[b];
        rest %= stride_[b];
      }
      bool interior_face = true;
      for (int b = 0; b < d; ++b) {
        if (b == a) {
          // Upper face of padded index p is interior iff 1 <= p < m.
          interior_face = interior_face && p[b] >= 1 && p[b] < m;
        } else {
          interior_face = interior_face && p[b] >= 1 && p[b] <= m;
        }
      }
      if (!interior_face) continue;
      Vec x{0.0, 0.0, 0.0};
      for (int b = 0; b < d; ++b) {
        const double lower = -L + static_cast<double>(p[b] - 1) * dx;
        x[b] = b == a ? lower + dx : lower + 0.5 * dx;
      }
      fv[c] = velocity(config_.flow, std::span<const double>(x.data(), static_cast<std::size_t>(d)), 0.0)[a];
    }
  }
}

void FdmSolver::fill_ghosts(std::vector<double>& u) const {
  // Neumann ghosts: copy the adjacent interior layer, axis by axis. Later axes
  // see ghosts filled by earlier ones, which also covers edges and corners.
  const int d = grid_.dim();
  const std::size_t m = static_cast<std::size_t>(grid_.bins_per_dim());
  const std::size_t total = u.size();
  for (int a = 0; a < d; ++a) {
    const std::size_t s = stride_[a];
    const std::size_t outer = total / (extent_[a] * s);
    for (std::size_t o = 0; o < outer; ++o) {
      const std::size_t base = o * extent_[a] * s;
      for (std::size_t i = 0; i < s; ++i) {
        u[base + i] = u[base + s + i];
        u[base + (m + 1) * s + i] = u[base + m * s + i];
      }
    }
  }
}

namespace {

template <class Model, bool Upwind, bool ExplicitReaction>
struct Kernel {
  const Model& model;
  double dt;
  double lambda;   // dt / dx
  double conduct;  // D / dx

  // Flux through the upper face of cell c along the axis with stride s.
  static double advective(double ul, double ur, double vf) {
    if constexpr (Upwind)
      return std::max(vf, 0.0) * ul + std::min(vf, 0.0) * ur;
    else
      return 0.5 * vf * (ul + ur);
  }
  double flux(const double* u, const double* v, std::size_t c, std::size_t s) const {
    const double ul = u[c], ur = u[c + s];
    return advective(ul, ur, v[c]) - conduct * (ur - ul);
  }
  double finish(double u_old, double div) const {
    double u = u_old + lambda * div;
    if constexpr (ExplicitReaction) u += dt * rate(model, u_old);
    return u;
  }

  // One row of m cells starting at padded index c0; `s` are the strides of the
  // active axes, the last being 1.
  template <int D>
  void row(const double* u, double* out, const std::array<const double*, 3>& v, std::size_t c0, std::size_t m,
           const std::array<std::size_t, 3>& s) const {
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t c = c0 + l;
      double div = flux(u, v[D - 1], c - 1, 1) - flux(u, v[D - 1], c, 1);
      if constexpr (D >= 2) div += flux(u, v[0], c - s[0], s[0]) - flux(u, v[0], c, s[0]);
      if constexpr (D == 3) div += flux(u, v[1], c - s[1], s[1]) - flux(u, v[1], c, s[1]);
      out[c] = finish(u[c], div);
    }
  }
};

template <bool Upwind, bool ExplicitReaction, class Model>
void sweep_with(const Model& model, double dt, double dx, double diffusion, int d, std::size_t m,
                const std::array<std::size_t, 3>& stride, const std::array<std::vector<double>, 3>& face,
                const double* u, double* out) {
  const Kernel<Model, Upwind, ExplicitReaction> kern{model, dt, dt / dx, diffusion / dx};
  const std::array<const double*, 3> v{face[0].data(), face[1].data(), face[2].data()};
  if (d == 1) {
    kern.template row<1>(u, out, v, 1, m, stride);
  } else if (d == 2) {
    for (std::size_t i = 1; i <= m; ++i) kern.template row<2>(u, out, v, i * stride[0] + 1, m, stride);
  } else {
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t k = 1; k <= m; ++k)
        kern.template row<3>(u, out, v, i * stride[0] + k * stride[1] + 1, m, stride);
  }
}

// Visits every interior cell of a padded array in row-major order.
template <class Fn>
void for_interior(int d, std::size_t m, const std::array<std::size_t, 3>& stride, Fn&& fn) {
  std::size_t j = 0;
  if (d == 1) {
    for (std::size_t l = 1; l <= m; ++l) fn(l, j++);
  } else if (d == 2) {
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t l = 1; l <= m; ++l) fn(i * stride[0] + l, j++);
  } else {
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t k = 1; k <= m; ++k)
        for (std::size_t l = 1; l <= m; ++l) fn(i * stride[0] + k * stride[1] + l, j++);
  }
}

}  // namespace

void FdmSolver::sweep(const std::vector<double>& u, std::vector<double>& next) const {
  const int d = grid_.dim();
  const std::size_t m = static_cast<std::size_t>(grid_.bins_per_dim());
  const double dx = grid_.bin_size();
  const bool upwind = config_.advection == AdvectionStencil::Upwind;
  const bool explicit_reaction = config_.reaction_mode == FdmReaction::Explicit;
  std::visit(
      [&](const auto& model) {
        auto run = [&]<bool U, bool R>() {
          sweep_with<U, R>(model, config_.dt, dx, config_.diffusion, d, m, stride_, face_velocity_, u.data(),
                           next.data());
        };
        if (upwind && explicit_reaction) run.template operator()<true, true>();
        else if (upwind) run.template operator()<true, false>();
        else if (explicit_reaction) run.template operator()<false, true>();
        else run.template operator()<false, false>();
      },
      config_.reaction);
  if (!explicit_reaction) {
    for_interior(d, m, stride_, [&](std::size_t c, std::size_t) {
      next[c] = react(config_.reaction, config_.scheme, next[c], config_.dt, config_.u_max);
    });
  }
}

void FdmSolver::advance(DensityField& field, std::uint64_t steps) {
  if (!(field.grid == grid_)) throw Error("fdm: field grid does not match the solver grid");
  FlushDenormals ftz;
  const int d = grid_.dim();
  const std::size_t m = static_cast<std::size_t>(grid_.bins_per_dim());
  for_interior(d, m, stride_, [&](std::size_t c, std::size_t j) { padded_[c] = field.values[j]; });
  for (std::uint64_t n = 0; n < steps; ++n) {
    fill_ghosts(padded_);
    sweep(padded_, scratch_);
    padded_.swap(scratch_);
    ++steps_taken_;
    if (steps_taken_ % 1000 == 0) check_finite();
  }
  for_interior(d, m, stride_, [&](std::size_t c, std::size_t j) { field.values[j] = padded_[c]; });
  field.time += static_cast<double>(steps) * config_.dt;
}

void FdmSolver::check_finite() const {
  for_interior(grid_.dim(), static_cast<std::size_t>(grid_.bins_per_dim()), stride_, [&](std::size_t c, std::size_t j) {
    if (!std::isfinite(padded_[c]))
      throw Error("fdm: non-finite value in cell " + std::to_string(j) + " after step " +
                  std::to_string(steps_taken_));
  });
}

DensityField fdm_step(const DensityField& field, const FdmConfig& config) {
  FdmSolver solver(config);
  DensityField out = field;
  solver.step(out);
  for (std::size_t j = 0; j < out.values.size(); ++j)
    if (!std::isfinite(out.values[j])) throw Error("fdm: non-finite value in cell " + std::to_string(j));
  return out;
}

FdmSummary fdm_run(const FdmConfig& config, const FieldObserver& observer) {
  FdmSolver solver(config);
  const GridSpec out_grid = config.output_grid();
  const std::uint64_t n_steps = step_count(config.final_time, config.dt);
  const bool writing = !config.output_dir.empty();
  const std::filesystem::path dir(config.output_dir);
  if (writing) std::filesystem::create_directories(dir);

  FdmSummary summary;
  DensityField field = discretize_initial(config.initial, solver.grid());
  auto emit = [&](std::uint64_t step) {
    for (std::size_t j = 0; j < field.values.size(); ++j)
      if (!std::isfinite(field.values[j])) throw Error("fdm: non-finite value in cell " + std::to_string(j));
    const DensityField sampled = config.sample_bins == 0 ? field : restrict_to_grid(field, out_grid);
    std::optional<double> front;
    if (config.front_threshold) front = front_position(field, *config.front_threshold);
    summary.diagnostics.push_back({step, field.time, field_total_mass(field), front});
    if (observer) observer(step, sampled);
    if (writing) {
      const std::string name = snapshot_filename(step);
      write_snapshot(sampled, Producer::FDM, dir / name);
      summary.snapshot_files.push_back(name);
    }
  };

  auto flush = [&](const std::string& status, const std::string& message) {
    if (!writing) return;
    write_diagnostics_csv(dir / "diagnostics.csv", summary.diagnostics, config.front_threshold.has_value());
    std::ofstream manifest(dir / "manifest.txt");
    manifest << "status=" << status << "\nsteps=" << summary.steps << "\nfinal_time=" << summary.final_time << "\n";
    if (!message.empty()) manifest << "message=" << message << "\n";
    manifest << "diagnostics=diagnostics.csv\n";
    for (const auto& f : summary.snapshot_files) manifest << "snapshot=" << f << "\n";
  };

  try {
    emit(0);
    for (std::uint64_t n = 0; n < n_steps;) {
      const std::uint64_t next = std::min(n_steps, (n / config.snapshot_every + 1) * config.snapshot_every);
      solver.advance(field, next - n);
      n = next;
      field.time = static_cast<double>(n) * config.dt;
      summary.steps = n;
      summary.final_time = field.time;
      emit(n);
    }
  } catch (const std::exception& e) {
    flush("error", e.what());
    throw;
  }
  flush("completed", "");
  summary.final_field = std::move(field);
  return summary;
}

}  // namespace sgip
