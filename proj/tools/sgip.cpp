// sgip: command-line front end for the particle solver and its reference.
//
//   sgip run <config>
//   sgip fdm <config>
//   sgip compare <snapA> <snapB>
//   sgip front <snapshot|run-dir> [--threshold 0.2] [--smooth]
//   sgip converge <config> --schedule <file> [--seeds k] [--reference snap]
//
// Errors go to stderr as a single JSON line and the exit status is nonzero.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgip/config.hpp"
#include "sgip/diagnostics.hpp"
#include "sgip/fdm.hpp"
#include "sgip/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int report(const std::string& kind, const std::string& message, json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  std::cerr << extra.dump() << std::endl;
  return 2;
}

std::string snapshot_kind(sgip::SnapshotError::Kind k) {
  switch (k) {
    case sgip::SnapshotError::Kind::Io: return "io";
    case sgip::SnapshotError::Kind::BadMagic: return "bad_magic";
    case sgip::SnapshotError::Kind::VersionMismatch: return "version_mismatch";
    case sgip::SnapshotError::Kind::Truncated: return "truncated";
    case sgip::SnapshotError::Kind::Malformed: return "malformed";
  }
  return "snapshot";
}

// Restricts the finer of two fields onto the coarser grid.
double compare_fields(const sgip::DensityField& a, const sgip::DensityField& b) {
  if (a.grid.dim() != b.grid.dim()) throw sgip::Error("compare: snapshots have different dimensions");
  if (a.grid == b.grid) return sgip::l2_error(a, b);
  if (a.grid.bin_size() < b.grid.bin_size()) return sgip::l2_error(sgip::restrict_to_grid(a, b.grid), b);
  return sgip::l2_error(a, sgip::restrict_to_grid(b, a.grid));
}

std::vector<fs::path> snapshot_files(const fs::path& target) {
  if (!fs::is_directory(target)) return {target};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(target))
    if (entry.path().extension() == ".sgrd") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw sgip::Error("front: no .sgrd files in " + target.string());
  return files;
}

void print_status(const std::string& what, std::uint64_t steps, double t, std::size_t snapshots) {
  std::cout << what << ": " << steps << " steps, t = " << t << ", " << snapshots << " snapshots\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic interacting particle solver for reaction-diffusion-advection equations"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "particle simulation");
  run->add_option("config", config_path, "config file")->required();
  std::string run_output;
  run->add_option("-o,--output", run_output, "output directory (overrides the config)");

  auto* fdm = app.add_subcommand("fdm", "finite-difference reference solution");
  fdm->add_option("config", config_path, "config file")->required();
  fdm->add_option("-o,--output", run_output, "output directory (overrides the config)");

  std::string snap_a, snap_b;
  auto* compare = app.add_subcommand("compare", "L2 distance between two snapshots");
  compare->add_option("a", snap_a)->required();
  compare->add_option("b", snap_b)->required();

  std::string front_target;
  double threshold = 0.2;
  bool smooth = false;
  int axis = 0;
  auto* front = app.add_subcommand("front", "front position series as CSV");
  front->add_option("target", front_target, "snapshot or run directory")->required();
  front->add_option("--threshold", threshold, "contour level in (0, 1)");
  front->add_option("--axis", axis, "axis to trace along");
  front->add_flag("--smooth", smooth, "three-point smoothing before the crossing search");

  std::string schedule_path, reference_path;
  int seeds = 5;
  int workers = 1;
  auto* converge = app.add_subcommand("converge", "refinement study against a reference solution");
  converge->add_option("config", config_path, "particle config file")->required();
  converge->add_option("--schedule", schedule_path, "one 'dt dx N' line per level")->required();
  converge->add_option("--seeds", seeds, "seeds per level")->check(CLI::PositiveNumber);
  converge->add_option("--reference", reference_path,
                       "reference snapshot at T (default: finite-difference run at a quarter of the finest dx)");
  converge->add_option("--workers", workers)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what());
  }

  try {
    if (*run) {
      auto config = sgip::parse_sim_config(config_path);
      if (!run_output.empty()) config.output_dir = run_output;
      const auto summary = sgip::sgip_run(config);
      print_status(summary.status == sgip::RunStatus::Extinct ? "extinct" : "completed", summary.steps,
                   summary.final_time, summary.snapshot_files.size());
    } else if (*fdm) {
      auto config = sgip::parse_fdm_config(config_path);
      if (!run_output.empty()) config.output_dir = run_output;
      const auto summary = sgip::fdm_run(config);
      print_status("completed", summary.steps, summary.final_time, summary.snapshot_files.size());
    } else if (*compare) {
      const auto a = sgip::read_snapshot(snap_a);
      const auto b = sgip::read_snapshot(snap_b);
      std::printf("%.17g\n", compare_fields(a.field, b.field));
    } else if (*front) {
      if (!(threshold > 0.0 && threshold < 1.0))
        return report("validation", "threshold must lie in (0, 1)", {{"key", "threshold"}, {"value", threshold}});
      std::printf("t,front_x\n");
      for (const auto& file : snapshot_files(front_target)) {
        const auto snap = sgip::read_snapshot(file);
        const auto x = sgip::front_position(snap.field, threshold, axis, smooth);
        if (x)
          std::printf("%.17g,%.17g\n", snap.field.time, *x);
        else
          std::printf("%.17g,nan\n", snap.field.time);
      }
    } else if (*converge) {
      const auto base = sgip::parse_sim_config(config_path);
      const auto schedule = sgip::parse_schedule(schedule_path, base.dim);
      std::optional<sgip::DensityField> reference;
      if (!reference_path.empty()) {
        reference = sgip::read_snapshot(reference_path).field;
      } else {
        double finest = schedule.levels().front().dx;
        for (const auto& l : schedule.levels()) finest = std::min(finest, l.dx);
        sgip::FdmConfig ref;
        ref.dim = base.dim;
        ref.half_width = base.half_width;
        ref.dx = finest / 4.0;
        ref.diffusion = base.diffusion;
        ref.flow = base.flow;
        ref.reaction = base.reaction;
        ref.initial = base.initial;
        ref.final_time = base.final_time;
        const double speed = sgip::flow_speed_bound(base.flow);
        double dt = 0.9 * ref.dx * ref.dx / (2.0 * base.dim * base.diffusion);
        if (speed > 0.0) dt = std::min(dt, 0.9 * ref.dx / speed);
        const auto n = static_cast<std::uint64_t>(std::ceil(base.final_time / dt));
        ref.dt = base.final_time / static_cast<double>(std::max<std::uint64_t>(n, 1));
        ref.snapshot_every = std::max<std::uint64_t>(n, 1);
        reference = sgip::fdm_run(ref).final_field;
      }
      std::vector<std::uint64_t> seed_list(static_cast<std::size_t>(seeds));
      std::iota(seed_list.begin(), seed_list.end(), base.seed);
      const auto table = sgip::convergence_study(base, schedule, seed_list, *reference, workers);
      std::printf("level,dt,dx,N,kappa,nu,mean_l2\n");
      for (const auto& l : table.levels)
        std::printf("%zu,%.17g,%.17g,%llu,%.17g,%.17g,%.17g\n", l.level, l.params.dt, l.params.dx,
                    static_cast<unsigned long long>(l.params.particles), l.kappa, l.nu, l.mean_l2);
      if (table.levels.size() > 1)
        std::printf("# error ratio coarse/fine: %.6g\n", table.levels.front().mean_l2 / table.levels.back().mean_l2);
    }
  } catch (const sgip::ConfigError& e) {
    return report("config", e.what(), {{"key", e.key}, {"line", e.line}});
  } catch (const sgip::SnapshotError& e) {
    return report("snapshot", e.what(), {{"kind", snapshot_kind(e.kind)}});
  } catch (const sgip::StepError& e) {
    return report("step", e.what(), {{"step", e.step}});
  } catch (const std::exception& e) {
    return report("runtime", e.what());
  }
  return 0;
}
