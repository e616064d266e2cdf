#include "sgip/reactions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgip/util.hpp"

namespace sgip {

void validate(const ReactionModel& model) {
  std::visit(Overloaded{[](const reaction::Linear& m) {
                          if (!std::isfinite(m.lambda)) throw Error("reaction: linear lambda must be finite");
                        },
                        [](const reaction::FKPP&) {}, [](const reaction::Cubic&) {},
                        [](const reaction::Arrhenius& m) {
                          if (!(m.E > 0.0) || !std::isfinite(m.E)) throw Error("reaction: Arrhenius requires E > 0");
                        },
                        [](const reaction::Polynomial& m) {
                          if (m.coeffs.empty()) throw Error("reaction: polynomial needs at least one coefficient");
                          for (double a : m.coeffs)
                            if (!std::isfinite(a)) throw Error("reaction: polynomial coefficients must be finite");
                        }},
             model);
}

std::string reaction_name(const ReactionModel& model) {
  static const char* names[] = {"linear", "fkpp", "cubic", "arrhenius", "polynomial"};
  return names[model.index()];
}

bool has_closed_form(const ReactionModel& model) {
  return std::holds_alternative<reaction::FKPP>(model) || std::holds_alternative<reaction::Linear>(model);
}

void validate(const IntegratorScheme& s) {
  std::visit(Overloaded{[](const scheme::ClosedForm&) {},
                        [](const auto& implicit) {
                          if (!(implicit.tol > 0.0)) throw Error("scheme: tol must be positive");
                          if (implicit.max_iter < 1) throw Error("scheme: max_iter must be at least 1");
                        }},
             s);
}

std::string scheme_name(const IntegratorScheme& s) {
  static const char* names[] = {"closed_form", "backward_euler", "crank_nicolson"};
  return names[s.index()];
}

double rate(const reaction::Arrhenius& m, double u) { return u > 0.0 ? std::exp(-m.E / u) * (1.0 - u) : 0.0; }

double rate(const reaction::Polynomial& m, double u) {
  double acc = 0.0;
  for (auto it = m.coeffs.rbegin(); it != m.coeffs.rend(); ++it) acc = acc * u + *it;
  return acc;
}

namespace {

template <class Model>
inline double rate_of(const Model& m, double u) {
  return rate(m, u);
}

inline double slope_of(const reaction::Linear& m, double) { return m.lambda; }
inline double slope_of(const reaction::FKPP&, double u) { return 1.0 - 2.0 * u; }
inline double slope_of(const reaction::Cubic&, double u) { return 2.0 * u - 3.0 * u * u; }
inline double slope_of(const reaction::Arrhenius& m, double u) {
  if (u <= 0.0) return 0.0;
  return std::exp(-m.E / u) * (m.E / (u * u) * (1.0 - u) - 1.0);
}
inline double slope_of(const reaction::Polynomial& m, double u) {
  double acc = 0.0;
  for (std::size_t k = m.coeffs.size(); k-- > 1;) acc = acc * u + static_cast<double>(k) * m.coeffs[k];
  return acc;
}

template <class Model>
ImplicitSolve theta_newton(const Model& model, double u_star, double dt, double theta, double tol, int max_iter,
                           double u_max) {
  const double explicit_part = (1.0 - theta) * dt * rate_of(model, u_star);
  const double c = theta * dt;
  double u = u_star;
  double g = u - u_star - c * rate_of(model, u) - explicit_part;
  int iter = 0;
  while (std::abs(g) > tol) {
    if (iter >= max_iter) {
      std::ostringstream msg;
      msg << "Newton did not converge from u*=" << u_star << " (dt=" << dt << ") after " << iter
          << " iterations; last iterate " << u << ", residual " << g;
      throw NewtonError(msg.str(), u, g, iter);
    }
    const double dg = 1.0 - c * slope_of(model, u);
    if (dg == 0.0 || !std::isfinite(dg)) throw NewtonError("Newton: singular Jacobian", u, g, iter);
    u -= g / dg;
    ++iter;
    if (!std::isfinite(u)) throw NewtonError("Newton: non-finite iterate", u, g, iter);
    g = u - u_star - c * rate_of(model, u) - explicit_part;
  }
  ImplicitSolve out{u, iter, false};
  if (u < 0.0 || u > u_max) {
    out.value = std::clamp(u, 0.0, u_max);
    out.clamped = true;
  }
  return out;
}

inline double fkpp_exact(double u_star, double dt) {
  const double denom = u_star + (1.0 - u_star) * std::exp(-dt);
  if (!(denom > 0.0)) throw Error("FKPP closed form: non-positive denominator (u* < 0)");
  return u_star / denom;
}

}  // namespace

double rate(const ReactionModel& model, double u) {
  return std::visit([u](const auto& m) { return rate_of(m, u); }, model);
}

double rate_derivative(const ReactionModel& model, double u) {
  return std::visit([u](const auto& m) { return slope_of(m, u); }, model);
}

double react_closed_form(const ReactionModel& model, double u_star, double dt) {
  if (dt < 0.0) throw Error("closed form: dt must be non-negative");
  if (const auto* lin = std::get_if<reaction::Linear>(&model)) return u_star * std::exp(lin->lambda * dt);
  if (std::holds_alternative<reaction::FKPP>(model)) return fkpp_exact(u_star, dt);
  throw Error("closed form integration is only available for fkpp and linear reactions, not " + reaction_name(model));
}

ImplicitSolve solve_theta_step(const ReactionModel& model, double u_star, double dt, double theta, double tol,
                               int max_iter, double u_max) {
  return std::visit([&](const auto& m) { return theta_newton(m, u_star, dt, theta, tol, max_iter, u_max); }, model);
}

double react_backward_euler(const ReactionModel& model, double u_star, double dt, double tol, int max_iter,
                            double u_max) {
  return solve_theta_step(model, u_star, dt, 1.0, tol, max_iter, u_max).value;
}

double react_crank_nicolson(const ReactionModel& model, double u_star, double dt, double tol, int max_iter,
                            double u_max) {
  return solve_theta_step(model, u_star, dt, 0.5, tol, max_iter, u_max).value;
}

double react(const ReactionModel& model, const IntegratorScheme& s, double u_star, double dt, double u_max) {
  return std::visit(Overloaded{[&](const scheme::ClosedForm&) { return react_closed_form(model, u_star, dt); },
                               [&](const scheme::BackwardEuler& be) {
                                 return react_backward_euler(model, u_star, dt, be.tol, be.max_iter, u_max);
                               },
                               [&](const scheme::CrankNicolson& cn) {
                                 return react_crank_nicolson(model, u_star, dt, cn.tol, cn.max_iter, u_max);
                               }},
                    s);
}

namespace {

template <class Model, class Scheme>
std::size_t integrate_range(const Model& model, const Scheme& s, std::span<const double> in, std::span<double> out,
                            std::size_t offset, double dt, double u_max) {
  std::size_t clamped = 0;
  for (std::size_t j = 0; j < in.size(); ++j) {
    try {
      if constexpr (std::is_same_v<Scheme, scheme::ClosedForm>) {
        if constexpr (std::is_same_v<Model, reaction::FKPP>) {
          out[j] = in[j] == 0.0 ? 0.0 : fkpp_exact(in[j], dt);
        } else if constexpr (std::is_same_v<Model, reaction::Linear>) {
          out[j] = in[j] * std::exp(model.lambda * dt);
        } else {
          throw Error("closed form integration is only available for fkpp and linear reactions");
        }
      } else {
        constexpr double theta = std::is_same_v<Scheme, scheme::BackwardEuler> ? 1.0 : 0.5;
        const auto r = theta_newton(model, in[j], dt, theta, s.tol, s.max_iter, u_max);
        out[j] = r.value;
        clamped += r.clamped ? 1 : 0;
      }
    } catch (const Error& e) {
      const std::size_t bin = offset + j;
      throw ReactionError("reaction failed in bin " + std::to_string(bin) + ": " + e.what(), bin);
    }
  }
  return clamped;
}

}  // namespace

ReactionOutcome integrate_reaction_field(const DensityField& field, const ReactionModel& model,
                                         const IntegratorScheme& s, double dt, double u_max, int workers) {
  if (std::holds_alternative<scheme::ClosedForm>(s) && !has_closed_form(model))
    throw Error("closed_form scheme requires an fkpp or linear reaction, got " + reaction_name(model));
  ReactionOutcome result{DensityField(field.grid, field.time), 0.0, 0};
  const std::size_t n = field.values.size();
  std::vector<std::size_t> clamped(static_cast<std::size_t>(std::max(workers, 1)), 0);
  parallel_for(workers, n, [&](std::size_t begin, std::size_t end, int w) {
    std::span<const double> in(field.values.data() + begin, end - begin);
    std::span<double> out(result.field.values.data() + begin, end - begin);
    clamped[static_cast<std::size_t>(w)] = std::visit(
        [&](const auto& m, const auto& sc) { return integrate_range(m, sc, in, out, begin, dt, u_max); }, model, s);
  });
  for (auto c : clamped) result.clamped_bins += c;
  result.mass = field_total_mass(result.field);
  return result;
}

}  // namespace sgip
