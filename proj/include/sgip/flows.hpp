#pragma once

// Closed-form velocity fields v(x, t). All built-in fields are steady; the
// time argument is part of the interface so time-dependent fields can be
// added later without changing call sites.

#include <span>
#include <string>
#include <variant>

#include "sgip/core.hpp"

namespace sgip {

namespace flow {
struct Zero {};
struct Constant {
  Vec c{0.0, 0.0, 0.0};
};
/// v = (sin y, 0).
struct Shear {};
/// v = (-sin x cos y, cos x sin y).
struct Cellular {};
/// Cellular plus delta * (cos x sin y, -sin x cos y).
struct CatsEye {
  double delta = 2.0;
};
/// v = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x).
struct ABC {
  double A = 1.0;
  double B = 0.816496580927726;   // sqrt(2/3)
  double C = 0.5773502691896257;  // sqrt(1/3)
};
}  // namespace flow

using FlowField = std::variant<flow::Zero, flow::Constant, flow::Shear, flow::Cellular, flow::CatsEye, flow::ABC>;

/// Dimension the flow is defined in, or 0 if it works in any dimension.
int flow_dimension(const FlowField& flow);

/// Throws unless the flow can be evaluated in `dim` dimensions.
void check_flow_dimension(const FlowField& flow, int dim);

/// Upper bound on max-norm speed over the whole space.
double flow_speed_bound(const FlowField& flow);

std::string flow_name(const FlowField& flow);

inline Vec velocity(const flow::Zero&, std::span<const double>, double) { return {0.0, 0.0, 0.0}; }
inline Vec velocity(const flow::Constant& f, std::span<const double>, double) { return f.c; }
Vec velocity(const flow::Shear&, std::span<const double> x, double t);
Vec velocity(const flow::Cellular&, std::span<const double> x, double t);
Vec velocity(const flow::CatsEye& f, std::span<const double> x, double t);
Vec velocity(const flow::ABC& f, std::span<const double> x, double t);

/// Evaluates the flow at x. Throws on dimension mismatch.
Vec velocity(const FlowField& flow, std::span<const double> x, double t);

/// Central-difference divergence with step h.
double numerical_divergence(const FlowField& flow, std::span<const double> x, double h, double t = 0.0);

}  // namespace sgip
