#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "doctest.h"
#include "sgip/diagnostics.hpp"
#include "sgip/driver.hpp"
#include "sgip/snapshot.hpp"
#include "sgip/transport.hpp"

using namespace sgip;
namespace fs = std::filesystem;

namespace {

SimConfig paper_1d() {
  SimConfig c;
  c.dim = 1;
  c.half_width = 60.0;
  c.bins_per_dim = 150;
  c.particles = 1000000;
  c.dt = 0.5;
  c.final_time = 20.0;
  c.diffusion = 1.0;
  c.reaction = reaction::FKPP{};
  c.scheme = scheme::ClosedForm{};
  c.initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  c.seed = 1;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgip_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("interval initialization") {
  const std::size_t n = 1000000;
  const auto e = init_particles(init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, n, {1, 0});
  REQUIRE(e.size() == n);
  CHECK(e.particle_mass() == doctest::Approx(1e-6));
  double mean = 0.0;
  for (double x : e.positions()) {
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    mean += x;
  }
  mean /= n;
  CHECK(std::abs(mean - 0.5) <= 3.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ball initialization") {
  const init::IndicatorBall ball{3, {0.0, 0.0, 0.0}, 1.0};
  CHECK(initial_mass(ball) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  const auto e = init_particles(ball, 20000, {2, 0});
  CHECK(e.total_mass() == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto p = e.position(i);
    REQUIRE(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0);
  }
}

TEST_CASE("custom initialization follows the given field") {
  const GridSpec g(1, 2.0, 4);
  const init::Custom custom{DensityField(g, {0.0, 1.0, 3.0, 0.0}, 0.0), "inline"};
  CHECK(initial_mass(custom) == doctest::Approx(4.0));
  const auto e = init_particles(custom, 40000, {3, 0});
  const DensityField f = estimate_density(e, g);
  CHECK(f.values[0] == 0.0);
  CHECK(f.values[3] == 0.0);
  CHECK(f.values[2] / f.values[1] == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("initial condition validation") {
  CHECK_THROWS_AS(validate(init::IndicatorBox{1, {0.5, 0.0, 0.0}, {0.5, 0.0, 0.0}}, 1, 60.0), Error);
  CHECK_THROWS_AS(validate(init::IndicatorBox{1, {0.0, 0.0, 0.0}, {61.0, 0.0, 0.0}}, 1, 60.0), Error);
  CHECK_THROWS_AS(validate(init::IndicatorBall{2, {0.0, 0.0, 0.0}, 1.0}, 3, 60.0), Error);
  CHECK_NOTHROW(validate(init::IndicatorBall{3, {0.0, 0.0, 0.0}, 1.0}, 3, 60.0));
}

TEST_CASE("config validation") {
  SimConfig c = paper_1d();
  CHECK_NOTHROW(validate(c));
  c.final_time = 20.2;
  CHECK_THROWS_AS(validate(c), Error);
  c = paper_1d();
  c.scheme = scheme::ClosedForm{};
  c.reaction = reaction::Cubic{};
  CHECK_THROWS_AS(validate(c), Error);
  c = paper_1d();
  c.flow = flow::Cellular{};
  CHECK_THROWS_AS(validate(c), Error);
  CHECK(step_count(20.0, 0.5) == 40);
  CHECK(step_count(0.0, 0.5) == 0);
}

TEST_CASE("no transport and no reaction: mass exactly M0") {
  SimConfig c = paper_1d();
  c.particles = 5000;
  c.diffusion = 0.0;
  c.reaction = reaction::Linear{0.0};
  c.final_time = 5.0;
  const RunSummary r = sgip_run(c);
  REQUIRE(r.diagnostics.size() == 11);
  for (const auto& row : r.diagnostics) CHECK(row.total_mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("no transport, linear growth: mass grows like exp(n lambda dt)") {
  SimConfig c = paper_1d();
  c.particles = 5000;
  c.diffusion = 0.0;
  c.reaction = reaction::Linear{1.0};
  c.final_time = 5.0;
  const RunSummary r = sgip_run(c);
  for (const auto& row : r.diagnostics)
    CHECK(std::abs(row.total_mass / std::exp(row.time) - 1.0) <= 1e-10);
}

TEST_CASE("FKPP keeps a saturated field at 1") {
  // One particle per bin at the bin centers, so the histogram is exactly 1.
  SimConfig c = paper_1d();
  c.half_width = 4.0;
  c.bins_per_dim = 10;
  c.particles = 10;
  c.diffusion = 0.0;
  c.initial = init::IndicatorBox{1, {-4.0, 0.0, 0.0}, {4.0, 0.0, 0.0}};
  std::vector<double> pos;
  for (std::int64_t k = 0; k < 10; ++k) pos.push_back(c.grid().axis_center(k));
  ParticleEnsemble e(1, pos, 0.8);
  const StepOutput out = sgip_step(SimState{e, 0.0, 0}, c);
  for (double v : out.field.values) CHECK(v == 1.0);
  CHECK(out.mass == doctest::Approx(8.0));
  CHECK(out.next.ensemble.total_mass() == out.mass);
}

TEST_CASE("paper 1D FKPP run produces a front from 1 down to 0") {
  const RunSummary r = sgip_run(paper_1d());
  CHECK(r.status == RunStatus::Completed);
  CHECK(r.steps == 40);
  CHECK(r.final_time == 20.0);
  const DensityField& f = *r.final_field;
  const auto trace = smooth_trace(f.values);
  CHECK(trace[75] > 0.95);
  CHECK(trace[0] == 0.0);
  CHECK(trace[149] == 0.0);
  // Right half non-increasing up to sampling noise.
  for (std::size_t j = 76; j < 149; ++j) CHECK(trace[j + 1] <= trace[j] + 0.02);
  for (std::size_t j = 1; j < 75; ++j) CHECK(trace[j - 1] <= trace[j] + 0.02);
}

TEST_CASE("SGIP front speed is near the minimal speed") {
  SimConfig c = paper_1d();
  c.particles = 100000;
  c.front_threshold = 0.2;
  const RunSummary r = sgip_run(c);
  std::vector<std::pair<double, double>> series;
  for (const auto& row : r.diagnostics)
    if (row.front_x) series.emplace_back(row.time, *row.front_x);
  CHECK(std::abs(front_speed(series, 10.0, 20.0) - 2.0) <= 0.15);
}

TEST_CASE("T = 0 emits only the initial snapshot") {
  SimConfig c = paper_1d();
  c.particles = 1000;
  c.final_time = 0.0;
  c.output_dir = scratch_dir("t0").string();
  const RunSummary r = sgip_run(c);
  CHECK(r.steps == 0);
  CHECK(r.snapshot_files.size() == 1);
  CHECK(fs::exists(fs::path(c.output_dir) / "snap_000000.sgrd"));
  fs::remove_all(c.output_dir);
}

TEST_CASE("run output files") {
  SimConfig c = paper_1d();
  c.particles = 2000;
  c.final_time = 5.0;
  c.snapshot_every = 4;
  c.front_threshold = 0.2;
  c.output_dir = scratch_dir("files").string();
  const RunSummary r = sgip_run(c);
  // Steps 0, 4, 8 and the final step 10.
  CHECK(r.snapshot_files == std::vector<std::string>{"snap_000000.sgrd", "snap_000004.sgrd", "snap_000008.sgrd",
                                                      "snap_000010.sgrd"});
  const Snapshot last = read_snapshot(fs::path(c.output_dir) / "snap_000010.sgrd");
  CHECK(last.producer == Producer::SGIP);
  CHECK(last.field.time == 5.0);
  CHECK(last.field.values == r.final_field->values);

  std::ifstream csv(fs::path(c.output_dir) / "diagnostics.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "# sgip-diag v1");
  std::getline(csv, line);
  CHECK(line == "step,time,total_mass,front_x");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 11);

  std::ifstream manifest(fs::path(c.output_dir) / "manifest.txt");
  std::getline(manifest, line);
  CHECK(line == "status=completed");
  fs::remove_all(c.output_dir);
}

TEST_CASE("observer sees every emitted field") {
  SimConfig c = paper_1d();
  c.particles = 1000;
  c.final_time = 2.0;
  std::vector<std::uint64_t> steps;
  sgip_run(c, [&](std::uint64_t step, const DensityField& f) {
    steps.push_back(step);
    CHECK(f.time == doctest::Approx(0.5 * static_cast<double>(step)));
  });
  CHECK(steps == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("a failing stage raises StepError and leaves a manifest") {
  SimConfig c = paper_1d();
  c.particles = 2000;
  c.final_time = 2.0;
  c.reaction = reaction::Cubic{};
  c.scheme = scheme::BackwardEuler{1e-300, 1};
  c.output_dir = scratch_dir("fail").string();
  try {
    sgip_run(c);
    FAIL("expected a StepError");
  } catch (const StepError& e) {
    CHECK(e.step == 0);
  }
  std::ifstream manifest(fs::path(c.output_dir) / "manifest.txt");
  std::string line;
  std::getline(manifest, line);
  CHECK(line == "status=error");
  fs::remove_all(c.output_dir);
}

TEST_CASE("extinction stops the run") {
  SimConfig c = paper_1d();
  c.particles = 1000;
  c.final_time = 3.0;
  c.reaction = reaction::Linear{-5000.0};
  const RunSummary r = sgip_run(c);
  CHECK(r.status == RunStatus::Extinct);
  CHECK(r.steps == 1);
  CHECK(r.diagnostics.back().total_mass == 0.0);
}

TEST_CASE("runs are reproducible and independent of the worker count") {
  SimConfig c = paper_1d();
  c.dim = 2;
  c.bins_per_dim = 30;
  c.half_width = 12.0;
  c.particles = 20000;
  c.final_time = 2.0;
  c.flow = flow::Cellular{};
  c.initial = init::IndicatorBox{2, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}};
  const RunSummary a = sgip_run(c);
  const RunSummary b = sgip_run(c);
  c.workers = 3;
  const RunSummary w = sgip_run(c);
  CHECK(a.final_field->values == b.final_field->values);
  CHECK(a.final_field->values == w.final_field->values);
}
