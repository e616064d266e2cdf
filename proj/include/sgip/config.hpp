#pragma once

// Flat key=value configuration files.
//
//   # comment
//   dim = 1
//   L = 60
//   M = 150            (particle runs)   | dx = 0.01  (finite-difference runs)
//   N = 1000000        (particle runs only)
//   dt = 0.5
//   T = 20
//   D = 1
//   flow = zero | constant | shear | cellular | catseye | abc
//   flow.c = 1,0       flow.delta = 2       flow.A / flow.B / flow.C
//   reaction = linear | fkpp | cubic | arrhenius | polynomial
//   reaction.lambda    reaction.E           reaction.coeffs = a0,a1,...
//   scheme = closed_form | backward_euler | crank_nicolson
//   scheme.tol         scheme.max_iter
//   init = interval:a,b | box:a0,b0,a1,b1,... | ball:c0,...,r | custom:<snapshot>
//   seed = 42
//
// Optional: snapshot_every, output, u_max, workers, front.threshold,
// front.smooth; finite-difference runs also accept sample_M, sample_L,
// fdm.advection (upwind | central) and fdm.reaction (explicit | implicit).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgip/diagnostics.hpp"
#include "sgip/driver.hpp"
#include "sgip/fdm.hpp"

namespace sgip {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key, int line) : Error(what), key(std::move(key)), line(line) {}
  std::string key;
  /// 1-based line number, 0 when the key is missing.
  int line;
};

/// `base_dir` resolves relative paths (custom initial conditions).
SimConfig parse_sim_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
FdmConfig parse_fdm_config_text(std::string_view text, const std::filesystem::path& base_dir = {});

SimConfig parse_sim_config(const std::filesystem::path& path);
FdmConfig parse_fdm_config(const std::filesystem::path& path);

std::string to_config_text(const SimConfig& config);
std::string to_config_text(const FdmConfig& config);

/// One "dt dx N" triple per line; '#' starts a comment.
ConvergenceSchedule parse_schedule_text(std::string_view text, int dim);
ConvergenceSchedule parse_schedule(const std::filesystem::path& path, int dim);

}  // namespace sgip
