#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "sgip/transport.hpp"

using namespace sgip;

TEST_CASE("reflect_boundary") {
  auto reflect = [](double x) {
    reflect_boundary(std::span(&x, 1), 60.0);
    return x;
  };
  CHECK(reflect(61.0) == 59.0);
  CHECK(reflect(-60.5) == -59.5);
  CHECK(reflect(30.0) == 30.0);
  CHECK(reflect(60.0) == 60.0);
  // Multiple folds.
  CHECK(reflect(185.0) == doctest::Approx(-55.0));
}

TEST_CASE("deterministic transport") {
  ParticleEnsemble e(1, {0.0, 1.0, -2.0}, 1.0);
  const auto drift = advect_diffuse_step(e, flow::Constant{{1.0, 0.0, 0.0}}, 0.0, 0.5, 0.0, {1, 0}, 60.0);
  CHECK(drift.position(0)[0] == 0.5);
  CHECK(drift.position(1)[0] == 1.5);
  CHECK(drift.position(2)[0] == -1.5);
  CHECK(drift.total_mass() == e.total_mass());
  const auto still = advect_diffuse_step(e, flow::Zero{}, 0.0, 0.5, 0.0, {1, 0}, 60.0);
  CHECK(still.positions() == e.positions());
}

TEST_CASE("diffusion variance over one step") {
  const std::size_t n = 100000;
  ParticleEnsemble e(1, std::vector<double>(n, 0.0), 1.0 / n);
  const auto moved = advect_diffuse_step(e, flow::Zero{}, 1.0, 0.5, 0.0, {5, 0}, 60.0);
  double mean = 0.0;
  for (double x : moved.positions()) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : moved.positions()) var += (x - mean) * (x - mean);
  var /= (n - 1);
  CHECK(var >= 0.97);
  CHECK(var <= 1.03);
}

TEST_CASE("transport is independent of the worker count") {
  std::vector<double> pos(3 * 5000);
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = std::sin(0.1 * i) * 3.0;
  ParticleEnsemble e(3, pos, 1e-3);
  const auto a = advect_diffuse_step(e, flow::ABC{}, 0.7, 0.5, 0.0, {8, 3}, 4.0, 1);
  const auto b = advect_diffuse_step(e, flow::ABC{}, 0.7, 0.5, 0.0, {8, 3}, 4.0, 4);
  CHECK(a.positions() == b.positions());
  for (double x : a.positions()) {
    REQUIRE(x >= -4.0);
    REQUIRE(x <= 4.0);
  }
}

TEST_CASE("transport rejects non-finite positions") {
  ParticleEnsemble e(1, {0.0, std::numeric_limits<double>::quiet_NaN()}, 1.0);
  CHECK_THROWS_AS(advect_diffuse_step(e, flow::Zero{}, 1.0, 0.5, 0.0, {1, 0}, 60.0), Error);
}

TEST_CASE("histogram density") {
  const GridSpec g(1, 60.0, 150);
  ParticleEnsemble e(1, {0.1, 0.2, 0.3, 0.7}, 0.25);
  const DensityField f = estimate_density(e, g);
  for (std::size_t j = 0; j < g.num_bins(); ++j) CHECK(f.values[j] == (j == 75 ? doctest::Approx(1.25) : 0.0));
}

TEST_CASE("histogram of a uniform sample matches binomial statistics") {
  const GridSpec g(1, 60.0, 150);
  const std::size_t n = 200000;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<> u(0.0, 1.0);
  std::vector<double> pos(n);
  for (auto& x : pos) x = u(gen);
  ParticleEnsemble e(1, pos, 1.0 / n);
  const DensityField f = estimate_density(e, g);
  // Bin 75 covers [0, 0.8) entirely inside the support: p = 0.8.
  const double p = 0.8;
  const double expected = p / 0.8;
  CHECK(std::abs(f.values[75] - expected) <= 3.0 * std::sqrt(p * (1 - p) / n) / 0.8);
  CHECK(field_total_mass(f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_density is independent of the worker count") {
  std::vector<double> pos(2 * 10000);
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = 9.0 * std::cos(1.7 * i);
  ParticleEnsemble e(2, pos, 0.01);
  const GridSpec g(2, 10.0, 25);
  CHECK(estimate_density(e, g, 0.0, 1).values == estimate_density(e, g, 0.0, 3).values);
}
