#pragma once

// Reaction kinetics r(u) and per-bin integrators for du/dt = r(u).

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "sgip/core.hpp"

namespace sgip {

namespace reaction {
/// r(u) = lambda * u.
struct Linear {
  double lambda = 0.0;
};
/// r(u) = u (1 - u).
struct FKPP {};
/// r(u) = u^2 (1 - u).
struct Cubic {};
/// r(u) = exp(-E/u) (1 - u), with r(u) = 0 for u <= 0.
struct Arrhenius {
  double E = 0.5;
};
/// r(u) = sum_k a_k u^k.
struct Polynomial {
  std::vector<double> coeffs;
};
}  // namespace reaction

using ReactionModel =
    std::variant<reaction::Linear, reaction::FKPP, reaction::Cubic, reaction::Arrhenius, reaction::Polynomial>;

/// Throws if the model parameters are invalid (E <= 0, non-finite coefficients, ...).
void validate(const ReactionModel& model);
std::string reaction_name(const ReactionModel& model);
/// True for models with an exact solution operator (FKPP, Linear).
bool has_closed_form(const ReactionModel& model);

namespace scheme {
struct ClosedForm {};
struct BackwardEuler {
  double tol = 1e-12;
  int max_iter = 50;
};
struct CrankNicolson {
  double tol = 1e-12;
  int max_iter = 50;
};
}  // namespace scheme

using IntegratorScheme = std::variant<scheme::ClosedForm, scheme::BackwardEuler, scheme::CrankNicolson>;

void validate(const IntegratorScheme& scheme);
std::string scheme_name(const IntegratorScheme& scheme);

double rate(const ReactionModel& model, double u);
double rate_derivative(const ReactionModel& model, double u);

inline double rate(const reaction::Linear& m, double u) { return m.lambda * u; }
inline double rate(const reaction::FKPP&, double u) { return u * (1.0 - u); }
inline double rate(const reaction::Cubic&, double u) { return u * u * (1.0 - u); }
double rate(const reaction::Arrhenius& m, double u);
double rate(const reaction::Polynomial& m, double u);

/// Raised when Newton does not converge or produces a non-finite iterate.
class NewtonError : public Error {
 public:
  NewtonError(const std::string& what, double last_iterate, double residual, int iterations)
      : Error(what), last_iterate(last_iterate), residual(residual), iterations(iterations) {}
  double last_iterate;
  double residual;
  int iterations;
};

/// Raised by integrate_reaction_field; carries the failing bin.
class ReactionError : public Error {
 public:
  ReactionError(const std::string& what, std::size_t bin) : Error(what), bin(bin) {}
  std::size_t bin;
};

/// Exact solution operator over dt for FKPP and Linear models.
double react_closed_form(const ReactionModel& model, double u_star, double dt);

struct ImplicitSolve {
  double value = 0.0;
  int iterations = 0;
  bool clamped = false;
};

/// Solves u - u_star - theta*dt*r(u) - (1-theta)*dt*r(u_star) = 0 by Newton from
/// u_star and clamps the root into [0, u_max]. theta = 1 is backward Euler,
/// theta = 1/2 is Crank-Nicolson.
ImplicitSolve solve_theta_step(const ReactionModel& model, double u_star, double dt, double theta, double tol,
                               int max_iter, double u_max = 1.0);

double react_backward_euler(const ReactionModel& model, double u_star, double dt, double tol = 1e-12,
                            int max_iter = 50, double u_max = 1.0);
double react_crank_nicolson(const ReactionModel& model, double u_star, double dt, double tol = 1e-12,
                            int max_iter = 50, double u_max = 1.0);

/// One scheme step from u_star; dispatches on `scheme`.
double react(const ReactionModel& model, const IntegratorScheme& scheme, double u_star, double dt,
             double u_max = 1.0);

struct ReactionOutcome {
  DensityField field;
  /// Total mass of `field`.
  double mass = 0.0;
  /// Bins whose implicit root was clamped into [0, u_max].
  std::size_t clamped_bins = 0;
};

/// Integrates du/dt = r(u) over dt independently in every bin. The output keeps
/// the input time stamp. Results do not depend on `workers`.
ReactionOutcome integrate_reaction_field(const DensityField& field, const ReactionModel& model,
                                         const IntegratorScheme& scheme, double dt, double u_max = 1.0,
                                         int workers = 1);

}  // namespace sgip
