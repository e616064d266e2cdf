#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sgip/diagnostics.hpp"
#include "sgip/fdm.hpp"

using namespace sgip;

namespace {

FdmConfig base_1d() {
  FdmConfig c;
  c.dim = 1;
  c.half_width = 10.0;
  c.dx = 0.05;
  c.dt = 1e-3;
  c.diffusion = 1.0;
  c.reaction = reaction::Linear{0.0};
  c.initial = init::IndicatorBox{1, {-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  c.final_time = 1.0;
  c.snapshot_every = 1000;
  return c;
}

}  // namespace

TEST_CASE("heat equation matches the Gaussian kernel") {
  const double s0 = 1.0, t = 1.0, D = 1.0;
  FdmConfig c = base_1d();
  c.dx = 0.01;
  c.dt = 4e-5;
  c.final_time = t;
  c.snapshot_every = 25000;
  const GridSpec g = c.grid();
  DensityField u0(g);
  for (std::size_t j = 0; j < g.num_bins(); ++j) {
    const double x = g.axis_center(static_cast<std::int64_t>(j));
    u0.values[j] = std::exp(-x * x / (2 * s0)) / std::sqrt(2 * std::numbers::pi * s0);
  }
  c.initial = init::Custom{u0, "gaussian"};
  const FdmSummary s = fdm_run(c);
  DensityField exact(g, 1.0);
  const double var = s0 + 2 * D * t;
  for (std::size_t j = 0; j < g.num_bins(); ++j) {
    const double x = g.axis_center(static_cast<std::int64_t>(j));
    exact.values[j] = std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
  }
  CHECK(relative_l2_error(*s.final_field, exact) <= 0.01);
}

TEST_CASE("conservative stencil keeps the mass with zero-flux walls") {
  FdmConfig c = base_1d();
  c.dim = 2;
  c.half_width = 3.0;
  c.dx = 0.1;
  c.dt = 1e-3;
  c.flow = flow::Shear{};
  c.initial = init::IndicatorBox{2, {-1.0, -1.0, 0.0}, {2.5, 1.0, 0.0}};
  c.final_time = 3.0;
  const FdmSummary s = fdm_run(c);
  const double m0 = s.diagnostics.front().total_mass;
  CHECK(m0 == doctest::Approx(7.0));
  for (const auto& row : s.diagnostics) CHECK(std::abs(row.total_mass - m0) <= 1e-10 * m0);
}

TEST_CASE("saturated FKPP state is a fixed point under a cellular flow") {
  // Walls at multiples of pi, where the cellular flow has no normal component.
  FdmConfig c = base_1d();
  c.dim = 2;
  c.half_width = 4.0 * std::numbers::pi;
  c.dx = 2.0 * c.half_width / 100.0;
  c.dt = 1e-3;
  c.flow = flow::Cellular{};
  c.reaction = reaction::FKPP{};
  c.initial = init::IndicatorBox{2, {-c.half_width, -c.half_width, 0.0}, {c.half_width, c.half_width, 0.0}};
  c.final_time = 0.5;
  c.snapshot_every = 500;
  const FdmSummary s = fdm_run(c);
  for (double v : s.final_field->values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero data stays zero for FKPP") {
  FdmConfig c = base_1d();
  c.reaction = reaction::FKPP{};
  FdmSolver solver(c);
  DensityField f(solver.grid());
  for (int n = 0; n < 50; ++n) solver.step(f);
  for (double v : f.values) CHECK(v == 0.0);
  CHECK(f.time == doctest::Approx(0.05));
}

TEST_CASE("explicit and implicit reaction agree for small dt") {
  FdmConfig c = base_1d();
  c.reaction = reaction::FKPP{};
  c.final_time = 2.0;
  c.snapshot_every = 2000;
  const FdmSummary ex = fdm_run(c);
  c.reaction_mode = FdmReaction::Implicit;
  c.scheme = scheme::ClosedForm{};
  const FdmSummary im = fdm_run(c);
  CHECK(relative_l2_error(*im.final_field, *ex.final_field) <= 1e-3);
}

TEST_CASE("FDM front speed is grid independent and approaches 2 from below") {
  auto speed = [](double dx, double dt) {
    FdmConfig c;
    c.dim = 1;
    c.half_width = 60.0;
    c.dx = dx;
    c.dt = dt;
    c.reaction = reaction::FKPP{};
    c.initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    c.final_time = 20.0;
    c.snapshot_every = static_cast<std::uint64_t>(std::llround(0.5 / dt));
    c.front_threshold = 0.2;
    const FdmSummary s = fdm_run(c);
    std::vector<std::pair<double, double>> series;
    for (const auto& row : s.diagnostics) series.emplace_back(row.time, *row.front_x);
    return front_speed(series, 10.0, 20.0);
  };
  const double coarse = speed(0.08, 2e-3);
  const double fine = speed(0.04, 5e-4);
  CHECK(std::abs(coarse - fine) <= 5e-3);
  // Logarithmic delay of pulled fronts: 2 - 3/(2t) averaged over the window.
  CHECK(fine == doctest::Approx(2.0 - 1.5 * std::log(2.0) / 10.0).epsilon(0.01));
  CHECK(fine < 2.0);
}

TEST_CASE("FKPP reference self-converges under refinement") {
  auto solve = [](double dx, double dt) {
    FdmConfig c = base_1d();
    c.half_width = 60.0;
    c.dx = dx;
    c.dt = dt;
    c.reaction = reaction::FKPP{};
    c.initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    c.final_time = 10.0;
    c.snapshot_every = 1000000;
    return *fdm_run(c).final_field;
  };
  const DensityField coarse = solve(0.08, 2e-3);
  const DensityField mid = restrict_to_grid(solve(0.04, 5e-4), coarse.grid);
  const DensityField fine = restrict_to_grid(solve(0.02, 1.25e-4), coarse.grid);
  const double ratio = l2_error(coarse, mid) / l2_error(mid, fine);
  MESSAGE("self-convergence ratio " << ratio);
  CHECK(ratio >= 1.7);
}

TEST_CASE("restriction preserves mass and handles larger target domains") {
  const GridSpec fine(2, 4.8, 96);
  DensityField f = discretize_initial(init::IndicatorBox{2, {0.4, -1.2, 0.0}, {2.0, 0.4, 0.0}}, fine);
  CHECK(field_total_mass(f) == doctest::Approx(2.56).epsilon(1e-12));
  const DensityField same = restrict_to_grid(f, GridSpec(2, 4.8, 12));
  CHECK(std::abs(field_total_mass(same) - field_total_mass(f)) <= 1e-10 * field_total_mass(f));
  const DensityField wide = restrict_to_grid(f, GridSpec(2, 8.0, 20));
  CHECK(std::abs(field_total_mass(wide) - field_total_mass(f)) <= 1e-10 * field_total_mass(f));
  // Bin [0.8, 1.6) x [-0.8, 0) lies inside the box.
  CHECK(wide.values[wide.grid.flatten({11, 9, 0})] == doctest::Approx(1.0));
  CHECK_THROWS_AS(restrict_to_grid(f, GridSpec(2, 5.25, 21)), Error);  // misaligned
  CHECK_THROWS_AS(restrict_to_grid(f, GridSpec(2, 5.0, 10)), Error);   // straddles the fine boundary
  CHECK_THROWS_AS(restrict_to_grid(f, GridSpec(2, 4.8, 64)), Error);   // not a multiple
}

TEST_CASE("box discretization uses exact overlaps") {
  const GridSpec g(1, 1.0, 4);  // cells of width 0.5
  const DensityField f = discretize_initial(init::IndicatorBox{1, {-0.25, 0.0, 0.0}, {0.5, 0.0, 0.0}}, g);
  CHECK(f.values == std::vector<double>{0.0, 0.5, 1.0, 0.0});
}

TEST_CASE("FDM validation") {
  FdmConfig c = base_1d();
  c.dt = 2e-3;  // dx^2 / 2 = 1.25e-3
  CHECK_THROWS_AS(validate(c), Error);
  c = base_1d();
  c.dx = 0.3;  // 20 / 0.3 is not whole
  CHECK_THROWS_AS(validate(c), Error);
  c = base_1d();
  c.dim = 2;
  c.initial = init::IndicatorBox{2, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}};
  c.flow = flow::Constant{{60.0, 0.0, 0.0}};
  CHECK_THROWS_AS(validate(c), Error);
  c = base_1d();
  c.sample_bins = 7;
  CHECK_THROWS_AS(validate(c), Error);
  c.sample_bins = 25;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("FDM snapshots are restricted onto the sampling grid") {
  FdmConfig c = base_1d();
  c.sample_bins = 25;
  c.final_time = 0.5;
  c.snapshot_every = 200;
  std::vector<std::uint64_t> steps;
  fdm_run(c, [&](std::uint64_t step, const DensityField& f) {
    steps.push_back(step);
    CHECK(f.grid == GridSpec(1, 10.0, 25));
  });
  CHECK(steps == std::vector<std::uint64_t>{0, 200, 400, 500});
}
