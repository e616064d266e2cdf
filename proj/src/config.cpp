#include "sgip/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "sgip/snapshot.hpp"
#include "sgip/util.hpp"

namespace sgip {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

class KeyValues {
 public:
  KeyValues(std::string_view text, const std::set<std::string>& allowed) {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", "", line_no);
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (!allowed.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", key, line_no);
      if (entries_.count(key))
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'", key, line_no);
      if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'", key, line_no);
      entries_[key] = Entry{value, line_no, false};
      if (start > text.size()) break;
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const Entry& require(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'", key, 0);
    it->second.used = true;
    return it->second;
  }

  double number(const std::string& key) { return to_number(key, require(key)); }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t integer(const std::string& key) {
    const Entry& e = require(key);
    const double v = to_number(key, e);
    if (v < 0.0 || v != std::floor(v) || v > 1.8e19) fail(key, e, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t integer_or(const std::string& key, std::uint64_t fallback) { return has(key) ? integer(key) : fallback; }

  std::string text(const std::string& key) { return require(key).value; }
  std::string text_or(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  std::vector<double> numbers(const std::string& key) {
    const Entry& e = require(key);
    std::vector<double> out;
    for (auto part : split(e.value, ',')) out.push_back(parse_double(key, e, part));
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const Entry& e, const std::string& what) const {
    throw ConfigError("line " + std::to_string(e.line) + ": " + key + ": " + what, key, e.line);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    throw ConfigError((line ? "line " + std::to_string(line) + ": " : std::string()) + key + ": " + what, key, line);
  }

  /// Keys that were given but never consumed are parameters that do not apply
  /// to the selected variant.
  void reject_unused() const {
    for (const auto& [key, e] : entries_)
      if (!e.used)
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key + "' does not apply to this configuration",
                          key, e.line);
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  double parse_double(const std::string& key, const Entry& e, std::string_view s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      fail(key, e, "cannot parse number '" + std::string(s) + "'");
    return v;
  }
  double to_number(const std::string& key, const Entry& e) const { return parse_double(key, e, e.value); }

  std::map<std::string, Entry> entries_;
};

const std::set<std::string> kCommonKeys = {
    "dim",          "L",           "dt",       "T",         "D",          "flow",           "flow.c",
    "flow.delta",   "flow.A",      "flow.B",   "flow.C",    "reaction",   "reaction.lambda", "reaction.E",
    "reaction.coeffs", "scheme",   "scheme.tol", "scheme.max_iter", "init", "seed",        "snapshot_every",
    "output",       "u_max",       "front.threshold"};

std::set<std::string> sim_keys() {
  auto keys = kCommonKeys;
  keys.insert({"M", "N", "workers", "front.smooth"});
  return keys;
}

std::set<std::string> fdm_keys() {
  auto keys = kCommonKeys;
  keys.insert({"dx", "sample_M", "sample_L", "fdm.advection", "fdm.reaction"});
  return keys;
}

FlowField parse_flow(KeyValues& kv, int dim) {
  const std::string name = kv.text("flow");
  if (name == "zero") return flow::Zero{};
  if (name == "constant") {
    const auto c = kv.numbers("flow.c");
    if (static_cast<int>(c.size()) != dim) kv.fail("flow.c", "expected " + std::to_string(dim) + " components");
    flow::Constant f;
    for (int a = 0; a < dim; ++a) f.c[a] = c[a];
    return f;
  }
  if (name == "shear") return flow::Shear{};
  if (name == "cellular") return flow::Cellular{};
  if (name == "catseye") return flow::CatsEye{kv.number_or("flow.delta", 2.0)};
  if (name == "abc") {
    flow::ABC f;
    f.A = kv.number_or("flow.A", f.A);
    f.B = kv.number_or("flow.B", f.B);
    f.C = kv.number_or("flow.C", f.C);
    return f;
  }
  kv.fail("flow", "unknown flow '" + name + "'");
}

ReactionModel parse_reaction(KeyValues& kv) {
  const std::string name = kv.text("reaction");
  if (name == "fkpp") return reaction::FKPP{};
  if (name == "cubic") return reaction::Cubic{};
  if (name == "linear") return reaction::Linear{kv.number_or("reaction.lambda", 0.0)};
  if (name == "arrhenius") {
    const double E = kv.number_or("reaction.E", 0.5);
    if (!(E > 0.0)) kv.fail("reaction.E", "Arrhenius requires E > 0");
    return reaction::Arrhenius{E};
  }
  if (name == "polynomial") return reaction::Polynomial{kv.numbers("reaction.coeffs")};
  kv.fail("reaction", "unknown reaction '" + name + "'");
}

IntegratorScheme parse_scheme(KeyValues& kv, const std::string& name) {
  if (name == "closed_form") return scheme::ClosedForm{};
  const double tol = kv.number_or("scheme.tol", 1e-12);
  const auto max_iter = static_cast<int>(kv.integer_or("scheme.max_iter", 50));
  if (name == "backward_euler") return scheme::BackwardEuler{tol, max_iter};
  if (name == "crank_nicolson") return scheme::CrankNicolson{tol, max_iter};
  kv.fail("scheme", "unknown scheme '" + name + "'");
}

InitSpec parse_init(KeyValues& kv, int dim, const std::filesystem::path& base_dir) {
  const std::string spec = kv.text("init");
  const auto colon = spec.find(':');
  if (colon == std::string::npos) kv.fail("init", "expected kind:parameters");
  const std::string kind(trim(std::string_view(spec).substr(0, colon)));
  const std::string_view args = trim(std::string_view(spec).substr(colon + 1));
  if (kind == "custom") {
    std::filesystem::path p{std::string(args)};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    Snapshot snap = read_snapshot(p);
    return init::Custom{std::move(snap.field), p.string()};
  }
  std::vector<double> v;
  for (auto part : split(args, ',')) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    if (ec != std::errc() || ptr != part.data() + part.size()) kv.fail("init", "cannot parse '" + std::string(part) + "'");
    v.push_back(x);
  }
  if (kind == "interval") {
    if (dim != 1) kv.fail("init", "interval requires dim = 1");
    if (v.size() != 2) kv.fail("init", "interval needs a,b");
    return init::IndicatorBox{1, {v[0], 0.0, 0.0}, {v[1], 0.0, 0.0}};
  }
  if (kind == "box") {
    if (static_cast<int>(v.size()) != 2 * dim) kv.fail("init", "box needs 2*dim numbers lo0,hi0,...");
    init::IndicatorBox b;
    b.dim = dim;
    for (int a = 0; a < dim; ++a) {
      b.lo[a] = v[2 * a];
      b.hi[a] = v[2 * a + 1];
    }
    return b;
  }
  if (kind == "ball") {
    if (static_cast<int>(v.size()) != dim + 1) kv.fail("init", "ball needs dim center coordinates and a radius");
    init::IndicatorBall b;
    b.dim = dim;
    for (int a = 0; a < dim; ++a) b.center[a] = v[a];
    b.radius = v[dim];
    return b;
  }
  kv.fail("init", "unknown initial condition '" + kind + "'");
}

int parse_dim(KeyValues& kv) {
  const auto dim = kv.integer("dim");
  if (dim < 1 || dim > 3) kv.fail("dim", "must be 1, 2 or 3");
  return static_cast<int>(dim);
}

// Re-throws invariant violations as ConfigErrors naming the most likely key.
template <class Fn>
void checked(KeyValues& kv, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    const std::string what = e.what();
    std::string key;
    for (const char* k : {"dt", "T", "D", "N", "M", "dx", "init", "flow", "reaction", "scheme", "u_max",
                          "snapshot_every", "front.threshold", "workers", "sample_M"}) {
      if (what.find(std::string(" ") + k) != std::string::npos || what.find(std::string(k) + " ") == 0) {
        key = k;
        break;
      }
    }
    if (key.empty() && what.rfind("init", 0) == 0) key = "init";
    throw ConfigError("invalid configuration: " + what, key, kv.line_of(key));
  }
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string flow_text(const FlowField& f, int dim) {
  std::ostringstream out;
  out << "flow = " << flow_name(f) << "\n";
  std::visit(Overloaded{[&](const flow::Constant& c) {
                          out << "flow.c = ";
                          for (int a = 0; a < dim; ++a) out << (a ? "," : "") << num(c.c[a]);
                          out << "\n";
                        },
                        [&](const flow::CatsEye& c) { out << "flow.delta = " << num(c.delta) << "\n"; },
                        [&](const flow::ABC& c) {
                          out << "flow.A = " << num(c.A) << "\nflow.B = " << num(c.B) << "\nflow.C = " << num(c.C)
                              << "\n";
                        },
                        [](const auto&) {}},
             f);
  return out.str();
}

std::string reaction_text(const ReactionModel& r) {
  std::ostringstream out;
  out << "reaction = " << reaction_name(r) << "\n";
  std::visit(Overloaded{[&](const reaction::Linear& m) { out << "reaction.lambda = " << num(m.lambda) << "\n"; },
                        [&](const reaction::Arrhenius& m) { out << "reaction.E = " << num(m.E) << "\n"; },
                        [&](const reaction::Polynomial& m) {
                          out << "reaction.coeffs = ";
                          for (std::size_t k = 0; k < m.coeffs.size(); ++k) out << (k ? "," : "") << num(m.coeffs[k]);
                          out << "\n";
                        },
                        [](const auto&) {}},
             r);
  return out.str();
}

std::string scheme_text(const IntegratorScheme& s) {
  std::ostringstream out;
  out << "scheme = " << scheme_name(s) << "\n";
  std::visit(Overloaded{[](const scheme::ClosedForm&) {},
                        [&](const auto& implicit) {
                          out << "scheme.tol = " << num(implicit.tol) << "\nscheme.max_iter = " << implicit.max_iter
                              << "\n";
                        }},
             s);
  return out.str();
}

std::string init_text(const InitSpec& spec) {
  std::ostringstream out;
  out << "init = ";
  std::visit(Overloaded{[&](const init::IndicatorBox& b) {
                          out << (b.dim == 1 ? "interval:" : "box:");
                          for (int a = 0; a < b.dim; ++a) out << (a ? "," : "") << num(b.lo[a]) << "," << num(b.hi[a]);
                        },
                        [&](const init::IndicatorBall& b) {
                          out << "ball:";
                          for (int a = 0; a < b.dim; ++a) out << num(b.center[a]) << ",";
                          out << num(b.radius);
                        },
                        [&](const init::Custom& c) { out << "custom:" << c.source; }},
             spec);
  out << "\n";
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), "", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

SimConfig parse_sim_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  KeyValues kv(text, sim_keys());
  SimConfig c;
  c.dim = parse_dim(kv);
  c.half_width = kv.number("L");
  c.bins_per_dim = static_cast<std::int64_t>(kv.integer("M"));
  c.particles = kv.integer("N");
  c.dt = kv.number("dt");
  c.final_time = kv.number("T");
  c.diffusion = kv.number("D");
  c.flow = parse_flow(kv, c.dim);
  c.reaction = parse_reaction(kv);
  c.scheme = parse_scheme(kv, kv.text("scheme"));
  c.initial = parse_init(kv, c.dim, base_dir);
  c.seed = kv.integer("seed");
  c.snapshot_every = kv.integer_or("snapshot_every", 1);
  c.output_dir = kv.text_or("output", "");
  c.u_max = kv.number_or("u_max", 1.0);
  c.workers = static_cast<int>(kv.integer_or("workers", 1));
  if (kv.has("front.threshold")) c.front_threshold = kv.number("front.threshold");
  c.front_smoothing = kv.integer_or("front.smooth", 0) != 0;
  kv.reject_unused();
  checked(kv, [&] { validate(c); });
  return c;
}

FdmConfig parse_fdm_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  KeyValues kv(text, fdm_keys());
  FdmConfig c;
  c.dim = parse_dim(kv);
  c.half_width = kv.number("L");
  c.dx = kv.number("dx");
  c.dt = kv.number("dt");
  c.final_time = kv.number("T");
  c.diffusion = kv.number("D");
  c.flow = parse_flow(kv, c.dim);
  c.reaction = parse_reaction(kv);
  c.initial = parse_init(kv, c.dim, base_dir);
  if (kv.has("seed")) kv.integer("seed");  // accepted for symmetry with particle configs; unused
  c.snapshot_every = kv.integer_or("snapshot_every", 1000);
  c.output_dir = kv.text_or("output", "");
  c.u_max = kv.number_or("u_max", 1.0);
  c.sample_bins = static_cast<std::int64_t>(kv.integer_or("sample_M", 0));
  c.sample_half_width = kv.number_or("sample_L", 0.0);
  if (kv.has("front.threshold")) c.front_threshold = kv.number("front.threshold");
  const std::string adv = kv.text_or("fdm.advection", "upwind");
  if (adv == "upwind")
    c.advection = AdvectionStencil::Upwind;
  else if (adv == "central")
    c.advection = AdvectionStencil::Central;
  else
    kv.fail("fdm.advection", "expected upwind or central");
  const std::string mode = kv.text_or("fdm.reaction", "explicit");
  if (mode == "explicit") {
    c.reaction_mode = FdmReaction::Explicit;
    if (kv.has("scheme")) kv.text("scheme");
  } else if (mode == "implicit") {
    c.reaction_mode = FdmReaction::Implicit;
    c.scheme = parse_scheme(kv, kv.text_or("scheme", "backward_euler"));
  } else {
    kv.fail("fdm.reaction", "expected explicit or implicit");
  }
  kv.reject_unused();
  checked(kv, [&] { validate(c); });
  return c;
}

SimConfig parse_sim_config(const std::filesystem::path& path) {
  return parse_sim_config_text(read_file(path), path.parent_path());
}

FdmConfig parse_fdm_config(const std::filesystem::path& path) {
  return parse_fdm_config_text(read_file(path), path.parent_path());
}

std::string to_config_text(const SimConfig& c) {
  std::ostringstream out;
  out << "dim = " << c.dim << "\nL = " << num(c.half_width) << "\nM = " << c.bins_per_dim << "\nN = " << c.particles
      << "\ndt = " << num(c.dt) << "\nT = " << num(c.final_time) << "\nD = " << num(c.diffusion) << "\n";
  out << flow_text(c.flow, c.dim) << reaction_text(c.reaction) << scheme_text(c.scheme) << init_text(c.initial);
  out << "seed = " << c.seed << "\nsnapshot_every = " << c.snapshot_every << "\nu_max = " << num(c.u_max)
      << "\nworkers = " << c.workers << "\n";
  if (!c.output_dir.empty()) out << "output = " << c.output_dir << "\n";
  if (c.front_threshold) out << "front.threshold = " << num(*c.front_threshold) << "\n";
  if (c.front_smoothing) out << "front.smooth = 1\n";
  return out.str();
}

std::string to_config_text(const FdmConfig& c) {
  std::ostringstream out;
  out << "dim = " << c.dim << "\nL = " << num(c.half_width) << "\ndx = " << num(c.dx) << "\ndt = " << num(c.dt)
      << "\nT = " << num(c.final_time) << "\nD = " << num(c.diffusion) << "\n";
  out << flow_text(c.flow, c.dim) << reaction_text(c.reaction) << init_text(c.initial);
  out << "snapshot_every = " << c.snapshot_every << "\nu_max = " << num(c.u_max) << "\n";
  out << "fdm.advection = " << (c.advection == AdvectionStencil::Upwind ? "upwind" : "central") << "\n";
  if (c.reaction_mode == FdmReaction::Implicit)
    out << "fdm.reaction = implicit\n" << scheme_text(c.scheme);
  else
    out << "fdm.reaction = explicit\n";
  if (c.sample_bins) out << "sample_M = " << c.sample_bins << "\n";
  if (c.sample_half_width > 0.0) out << "sample_L = " << num(c.sample_half_width) << "\n";
  if (!c.output_dir.empty()) out << "output = " << c.output_dir << "\n";
  if (c.front_threshold) out << "front.threshold = " << num(*c.front_threshold) << "\n";
  return out.str();
}

ConvergenceSchedule parse_schedule_text(std::string_view text, int dim) {
  std::vector<ScheduleLevel> levels;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    ScheduleLevel l;
    double n = 0.0;
    if (!(fields >> l.dt >> l.dx >> n) || n < 1.0 || n != std::floor(n))
      throw ConfigError("schedule line " + std::to_string(line_no) + ": expected 'dt dx N'", "schedule", line_no);
    std::string extra;
    if (fields >> extra)
      throw ConfigError("schedule line " + std::to_string(line_no) + ": trailing text", "schedule", line_no);
    l.particles = static_cast<std::uint64_t>(n);
    levels.push_back(l);
  }
  return ConvergenceSchedule(std::move(levels), dim);
}

ConvergenceSchedule parse_schedule(const std::filesystem::path& path, int dim) {
  return parse_schedule_text(read_file(path), dim);
}

}  // namespace sgip
