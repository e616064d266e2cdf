#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sgip/flows.hpp"

using namespace sgip;

namespace {
Vec at(const FlowField& f, std::initializer_list<double> x) {
  std::vector<double> p(x);
  return velocity(f, p, 0.0);
}
}  // namespace

TEST_CASE("flow values at reference points") {
  const double pi = std::numbers::pi;
  const Vec s = at(flow::Shear{}, {5.0, pi / 2});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == 0.0);
  const Vec c = at(flow::Cellular{}, {0.0, 0.0});
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);
  const Vec abc = at(flow::ABC{}, {0.0, 0.0, 0.0});
  CHECK(abc[0] == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(abc[1] == doctest::Approx(1.0));
  CHECK(abc[2] == doctest::Approx(std::sqrt(2.0 / 3.0)));
  // Cat's eye adds delta (cos x sin y, -sin x cos y) to the cellular field.
  const Vec ce = at(flow::CatsEye{2.0}, {0.0, pi / 2});
  CHECK(ce[0] == doctest::Approx(2.0));
  CHECK(ce[1] == doctest::Approx(1.0));
}

TEST_CASE("flows are divergence free") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<> u(-60.0, 60.0);
  for (const FlowField& f : {FlowField(flow::Shear{}), FlowField(flow::Cellular{}), FlowField(flow::CatsEye{})}) {
    for (int k = 0; k < 100; ++k) {
      const double x[2] = {u(gen), u(gen)};
      CHECK(std::abs(numerical_divergence(f, x, 1e-4)) <= 1e-6);
    }
  }
  for (int k = 0; k < 100; ++k) {
    const double x[3] = {u(gen), u(gen), u(gen)};
    CHECK(std::abs(numerical_divergence(flow::ABC{}, x, 1e-4)) <= 1e-6);
  }
  const double x[2] = {1.3, -0.2};
  CHECK(numerical_divergence(flow::Constant{{1.0, 2.0, 0.0}}, x, 1e-4) == 0.0);
}

TEST_CASE("flow dimension checks") {
  CHECK_THROWS_AS(check_flow_dimension(flow::ABC{}, 2), Error);
  CHECK_THROWS_AS(check_flow_dimension(flow::Cellular{}, 1), Error);
  CHECK_NOTHROW(check_flow_dimension(flow::Zero{}, 1));
  const double x[2] = {0.0, 0.0};
  CHECK_THROWS_AS(velocity(FlowField(flow::ABC{}), x, 0.0), Error);
  CHECK(flow_speed_bound(flow::Cellular{}) >= 1.0);
}
