#include <cmath>
#include <random>

#include "doctest.h"
#include "sgip/diagnostics.hpp"
#include "sgip/fdm.hpp"

using namespace sgip;

TEST_CASE("l2_error") {
  const GridSpec g(1, 60.0, 150);
  DensityField a(g), b(g);
  for (std::size_t j = 0; j < g.num_bins(); ++j) a.values[j] = b.values[j] = std::sin(0.1 * j);
  CHECK(l2_error(a, b) == 0.0);
  b.values[40] += 0.1;
  CHECK(l2_error(a, b) == doctest::Approx(std::sqrt(0.8 * 0.01)));
  CHECK(l2_error(a, b) == doctest::Approx(0.089443).epsilon(1e-5));
  CHECK_THROWS_AS(l2_error(a, DensityField(GridSpec(1, 60.0, 75))), Error);
}

TEST_CASE("l2_error satisfies the triangle inequality") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<> u(-1.0, 1.0);
  const GridSpec g(2, 3.0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    DensityField a(g), b(g), c(g);
    for (std::size_t j = 0; j < g.num_bins(); ++j) a.values[j] = u(gen), b.values[j] = u(gen), c.values[j] = u(gen);
    CHECK(l2_error(a, c) <= l2_error(a, b) + l2_error(b, c) + 1e-14);
  }
}

TEST_CASE("front position on a step trace") {
  const GridSpec g(1, 60.0, 150);
  DensityField f(g);
  for (int j = 0; j < 10; ++j) f.values[j] = 1.0;
  CHECK(*front_position(f, 0.2) == doctest::Approx(-52.4 + 0.8 * 0.8));
  CHECK(*front_position(f, 0.2) == doctest::Approx(-51.76));
  CHECK(*front_position(f, 0.5) == doctest::Approx(-52.0));
  CHECK_FALSE(front_position(DensityField(g), 0.2).has_value());
  CHECK_THROWS_AS(front_position(f, 1.5), Error);
  CHECK_THROWS_AS(front_position(f, 0.0), Error);
}

TEST_CASE("front position picks the rightmost crossing and traces through the origin bin") {
  const GridSpec g(2, 2.0, 4);  // axis bins centered at -1.5, -0.5, 0.5, 1.5
  DensityField f(g);
  // Row k1 = 2 contains coordinate 0 on axis 1.
  f.values[g.flatten({0, 2, 0})] = 1.0;
  f.values[g.flatten({2, 2, 0})] = 1.0;
  f.values[g.flatten({3, 0, 0})] = 1.0;  // off the traced row
  CHECK(*front_position(f, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("smooth_trace") {
  const std::vector<double> t = {0.0, 3.0, 0.0, 3.0};
  const auto s = smooth_trace(t);
  CHECK(s == std::vector<double>{1.5, 1.0, 2.0, 1.5});
}

TEST_CASE("front speed fits") {
  const std::vector<std::pair<double, double>> line = {{0, 0}, {1, 2}, {2, 4}, {3, 6}};
  CHECK(front_speed(line) == doctest::Approx(2.0));
  const std::vector<std::pair<double, double>> flat = {{0, 5}, {1, 5}, {2, 5}};
  CHECK(front_speed(flat) == 0.0);
  CHECK_THROWS_AS(front_speed(std::vector<std::pair<double, double>>{{0, 0}, {1, 1}}), Error);
  CHECK(front_speed(line, 1.0, 3.0) == doctest::Approx(2.0));
}

TEST_CASE("convergence schedule invariants") {
  CHECK_NOTHROW(ConvergenceSchedule({{0.5, 0.8, 20000}, {0.25, 0.2, 640000}}, 1));
  CHECK_THROWS_AS(ConvergenceSchedule({{0.5, 0.4, 20000}, {0.25, 0.4, 640000}}, 1), Error);  // kappa grows
  CHECK_THROWS_AS(ConvergenceSchedule({{0.5, 0.8, 20000}, {0.25, 0.2, 20000}}, 1), Error);   // nu grows
  CHECK_THROWS_AS(ConvergenceSchedule({}, 1), Error);
  const ConvergenceSchedule s({{0.5, 0.8, 20000}}, 1);
  CHECK(s.kappa(0) == doctest::Approx(1.6));
  CHECK(s.nu(0) == doctest::Approx(1.0 / (std::sqrt(20000 * 0.8) * 0.5)));
}

TEST_CASE("single-level convergence study") {
  SimConfig base;
  base.dim = 1;
  base.half_width = 20.0;
  base.particles = 1;
  base.dt = 0.5;
  base.final_time = 2.0;
  base.reaction = reaction::FKPP{};
  base.initial = init::IndicatorBox{1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  FdmConfig ref;
  ref.half_width = 20.0;
  ref.dx = 0.1;
  ref.dt = 2e-3;
  ref.final_time = 2.0;
  ref.snapshot_every = 1000;
  ref.initial = base.initial;
  const DensityField reference = *fdm_run(ref).final_field;
  const std::vector<std::uint64_t> seeds = {1, 2};
  const ConvergenceTable t =
      convergence_study(base, ConvergenceSchedule({{0.5, 0.8, 5000}}, 1), seeds, reference);
  CHECK(t.rows.size() == 2);
  CHECK(t.levels.size() == 1);
  CHECK(t.levels[0].mean_l2 > 0.0);
  CHECK(t.levels[0].mean_l2 < 0.5);
  // Reference not fine enough: dx 0.1 vs finest level 0.2.
  CHECK_THROWS_AS(convergence_study(base, ConvergenceSchedule({{0.5, 0.2, 5000}}, 1), seeds, reference), Error);
}
