#include "sgip/flows.hpp"

#include <algorithm>
#include <cmath>

#include "sgip/util.hpp"

namespace sgip {

int flow_dimension(const FlowField& f) {
  return std::visit(Overloaded{[](const flow::Zero&) { return 0; }, [](const flow::Constant&) { return 0; },
                               [](const flow::Shear&) { return 2; }, [](const flow::Cellular&) { return 2; },
                               [](const flow::CatsEye&) { return 2; }, [](const flow::ABC&) { return 3; }},
                    f);
}

void check_flow_dimension(const FlowField& f, int dim) {
  const int need = flow_dimension(f);
  if (need != 0 && need != dim)
    throw Error("flow '" + flow_name(f) + "' is defined in " + std::to_string(need) + "D, run has dim " +
                std::to_string(dim));
}

double flow_speed_bound(const FlowField& f) {
  return std::visit(Overloaded{[](const flow::Zero&) { return 0.0; },
                               [](const flow::Constant& c) {
                                 return std::max({std::abs(c.c[0]), std::abs(c.c[1]), std::abs(c.c[2])});
                               },
                               [](const flow::Shear&) { return 1.0; }, [](const flow::Cellular&) { return 1.0; },
                               [](const flow::CatsEye& c) { return 1.0 + std::abs(c.delta); },
                               [](const flow::ABC& c) { return std::abs(c.A) + std::abs(c.B) + std::abs(c.C); }},
                    f);
}

std::string flow_name(const FlowField& f) {
  return std::visit(Overloaded{[](const flow::Zero&) { return std::string("zero"); },
                               [](const flow::Constant&) { return std::string("constant"); },
                               [](const flow::Shear&) { return std::string("shear"); },
                               [](const flow::Cellular&) { return std::string("cellular"); },
                               [](const flow::CatsEye&) { return std::string("catseye"); },
                               [](const flow::ABC&) { return std::string("abc"); }},
                    f);
}

Vec velocity(const flow::Shear&, std::span<const double> x, double) { return {std::sin(x[1]), 0.0, 0.0}; }

Vec velocity(const flow::Cellular&, std::span<const double> x, double) {
  return {-std::sin(x[0]) * std::cos(x[1]), std::cos(x[0]) * std::sin(x[1]), 0.0};
}

Vec velocity(const flow::CatsEye& f, std::span<const double> x, double) {
  const double sx = std::sin(x[0]), cx = std::cos(x[0]);
  const double sy = std::sin(x[1]), cy = std::cos(x[1]);
  return {-sx * cy + f.delta * (cx * sy), cx * sy + f.delta * (-sx * cy), 0.0};
}

Vec velocity(const flow::ABC& f, std::span<const double> x, double) {
  return {f.A * std::sin(x[2]) + f.C * std::cos(x[1]), f.B * std::sin(x[0]) + f.A * std::cos(x[2]),
          f.C * std::sin(x[1]) + f.B * std::cos(x[0])};
}

Vec velocity(const FlowField& f, std::span<const double> x, double t) {
  const int need = flow_dimension(f);
  if (need != 0 && static_cast<int>(x.size()) != need)
    throw Error("velocity: flow '" + flow_name(f) + "' expects a " + std::to_string(need) + "D point");
  return std::visit([&](const auto& concrete) { return velocity(concrete, x, t); }, f);
}

double numerical_divergence(const FlowField& f, std::span<const double> x, double h, double t) {
  Vec plus{0.0, 0.0, 0.0};
  Vec minus{0.0, 0.0, 0.0};
  double div = 0.0;
  const std::size_t d = x.size();
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) plus[b] = minus[b] = x[b];
    plus[a] += h;
    minus[a] -= h;
    const Vec vp = velocity(f, std::span<const double>(plus.data(), d), t);
    const Vec vm = velocity(f, std::span<const double>(minus.data(), d), t);
    div += (vp[a] - vm[a]) / (2.0 * h);
  }
  return div;
}

}  // namespace sgip
