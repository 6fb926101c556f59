#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ac2/boundary.hpp"
#include "ac2/common.hpp"
#include "ac2/grid.hpp"
#include "ac2/identities.hpp"
#include "ac2/levelset.hpp"
#include "ac2/potential.hpp"
#include "ac2/profile1d.hpp"
#include "ac2/solver2d.hpp"

namespace ac2 {

// ---------------------------------------------------------------------------
// Config file: a small TOML subset. [section] headers, key = value lines,
// values are strings, booleans, numbers, or arrays of numbers; # comments.
// Keys are stored flattened as "section.key".
// ---------------------------------------------------------------------------

struct ConfigValue {
  enum class Kind { Number, Boolean, String, Array } kind = Kind::Number;
  double num = 0.0;
  bool boolean = false;
  std::string str;
  std::vector<double> arr;
  int line = 0;
};

struct ConfigTable {
  std::map<std::string, ConfigValue> kv;
  std::string raw;  // original text, hashed into reports

  bool has(const std::string& key) const { return kv.count(key) != 0; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw Error(ErrorKind::Config, os.str());
}

inline ConfigValue parse_value(std::string v, int line) {
  ConfigValue out;
  out.line = line;
  v = trim(v);
  if (v.empty()) config_fail(line, "empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') config_fail(line, "unterminated string");
    out.kind = ConfigValue::Kind::String;
    out.str = v.substr(1, v.size() - 2);
    return out;
  }
  if (v == "true" || v == "false") {
    out.kind = ConfigValue::Kind::Boolean;
    out.boolean = (v == "true");
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']') config_fail(line, "unterminated array");
    out.kind = ConfigValue::Kind::Array;
    std::string body = v.substr(1, v.size() - 2);
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(item, &used);
      } catch (...) {
        config_fail(line, "array element '" + item + "' is not a number");
      }
      if (used != item.size())
        config_fail(line, "array element '" + item + "' is not a number");
      out.arr.push_back(d);
    }
    return out;
  }
  std::size_t used = 0;
  try {
    out.num = std::stod(v, &used);
  } catch (...) {
    config_fail(line, "value '" + v + "' is not a number");
  }
  if (used != v.size()) config_fail(line, "trailing characters after number '" + v + "'");
  out.kind = ConfigValue::Kind::Number;
  return out;
}

}  // namespace detail

inline ConfigTable parse_config_text(const std::string& text) {
  ConfigTable t;
  t.raw = text;
  std::istringstream is(text);
  std::string line, section;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    // strip comments outside of strings
    bool in_str = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') in_str = !in_str;
      if (line[k] == '#' && !in_str) {
        line = line.substr(0, k);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') detail::config_fail(n, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty()) detail::config_fail(n, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) detail::config_fail(n, "expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) detail::config_fail(n, "empty key");
    if (!section.empty()) key = section + "." + key;
    if (t.kv.count(key)) detail::config_fail(n, "duplicate key '" + key + "'");
    t.kv[key] = detail::parse_value(line.substr(eq + 1), n);
  }
  return t;
}

inline ConfigTable load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Config, "cannot open scenario file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config_text(os.str());
}

// ---------------------------------------------------------------------------
// ScenarioConfig: validated view of a config table.
// ---------------------------------------------------------------------------

struct CheckToggles {
  bool hamiltonian = true;
  bool planar_flux = false;  // only meaningful for planar boundaries
  bool moment = true;
  bool modica = true;
  bool energy = true;
  bool levelset = true;
  bool decay = false;
  bool symmetry = false;
};

struct CheckTolerances {
  double hamiltonian = -1.0;  // <0: default 5e-3 * beta
  double planar_flux = -1.0;  // default 1e-2 * beta
  double moment = -1.0;       // default 2e-3 * beta
  double modica = 5e-3;
  double energy_slack = -1.0;  // default 1e-6 * beta
  double balance = 0.05;
  double decay_rel = 0.10;
  double symmetry = 1e-3;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string potential_kind = "quartic";
  double potential_scale = 1.0;
  double profile_half_length = 12.0;
  double profile_step = 0.01;
  double lx = 0.0, ly = 0.0, hx = 0.0, hy = 0.0;
  BoundarySpec boundary;
  SolveConfig solver;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 1;
  CheckToggles checks;
  CheckTolerances tol;
  std::string out_dir = "out";
  std::string config_text;  // raw text used, for hashing and provenance
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const ConfigTable& t) : t_(t) {}

  double num(const std::string& key) const {
    require(key, ConfigValue::Kind::Number);
    return t_.kv.at(key).num;
  }
  double num(const std::string& key, double fallback) const {
    if (!t_.has(key)) return fallback;
    return num(key);
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!t_.has(key)) return fallback;
    require(key, ConfigValue::Kind::Boolean);
    return t_.kv.at(key).boolean;
  }
  std::string str(const std::string& key) const {
    require(key, ConfigValue::Kind::String);
    return t_.kv.at(key).str;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    if (!t_.has(key)) return fallback;
    return str(key);
  }
  std::vector<double> array(const std::string& key) const {
    require(key, ConfigValue::Kind::Array);
    return t_.kv.at(key).arr;
  }
  void mark_known(const std::string& key) const { known_.push_back(key); }

  void reject_unknown() const {
    for (const auto& [key, val] : t_.kv)
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        config_fail(val.line, "unknown key '" + key + "'");
  }

 private:
  void require(const std::string& key, ConfigValue::Kind kind) const {
    if (!t_.has(key))
      throw Error(ErrorKind::Config, "missing config key '" + key + "'");
    mark_known(key);
    const auto& v = t_.kv.at(key);
    if (v.kind != kind) {
      static const char* names[] = {"number", "boolean", "string", "array"};
      config_fail(v.line, "key '" + key + "' must be a " +
                              names[static_cast<int>(kind)]);
    }
  }

  const ConfigTable& t_;
  mutable std::vector<std::string> known_;
};

}  // namespace detail

inline ScenarioConfig make_scenario(const ConfigTable& t) {
  detail::ConfigReader r(t);
  ScenarioConfig cfg;
  cfg.config_text = t.raw;
  cfg.name = r.str("name", "scenario");

  cfg.potential_kind = r.str("potential.kind");
  cfg.potential_scale = r.num("potential.scale", 1.0);
  if (cfg.potential_kind != "quartic")
    throw Error(ErrorKind::Config,
                "potential.kind '" + cfg.potential_kind + "' is not supported");
  if (!(cfg.potential_scale > 0.0))
    throw Error(ErrorKind::Config, "potential.scale must be positive");

  cfg.profile_half_length = r.num("profile.half_length", 12.0);
  cfg.profile_step = r.num("profile.step", 0.01);

  cfg.lx = r.num("grid.lx");
  cfg.ly = r.num("grid.ly");
  const double h = r.num("grid.h", -1.0);
  cfg.hx = r.num("grid.hx", h);
  cfg.hy = r.num("grid.hy", h);
  if (!(cfg.lx > 0 && cfg.ly > 0 && cfg.hx > 0 && cfg.hy > 0))
    throw Error(ErrorKind::Config, "grid.lx/ly and grid.h (or hx, hy) must be positive");

  const std::string kind = r.str("boundary.kind");
  auto theta = [&]() { return deg2rad(r.num("boundary.theta_deg")); };
  if (kind == "planar") {
    cfg.boundary = PlanarSpec{theta(), r.num("boundary.offset", 0.0)};
  } else if (kind == "fourend") {
    FourEndSpec s;
    s.theta = theta();
    if (t.has("boundary.offsets")) {
      auto off = r.array("boundary.offsets");
      if (off.size() != 4)
        throw Error(ErrorKind::Config, "boundary.offsets must have 4 entries");
      std::copy(off.begin(), off.end(), s.offsets.begin());
    }
    cfg.boundary = s;
  } else if (kind == "multiend") {
    MultiEndSpec s;
    auto ang = r.array("boundary.angles_deg");
    std::vector<double> off(ang.size(), 0.0);
    if (t.has("boundary.offsets")) off = r.array("boundary.offsets");
    if (off.size() != ang.size())
      throw Error(ErrorKind::Config,
                  "boundary.offsets must match boundary.angles_deg in length");
    for (std::size_t k = 0; k < ang.size(); ++k)
      s.ends.emplace_back(deg2rad(ang[k]), off[k]);
    cfg.boundary = s;
  } else if (kind == "halfplane") {
    cfg.boundary = HalfPlaneSpec{theta(), r.num("boundary.offset", 0.0)};
  } else {
    throw Error(ErrorKind::Config, "boundary.kind '" + kind + "' is not recognized");
  }

  cfg.solver.tol = r.num("solver.tol", cfg.solver.tol);
  cfg.solver.max_newton = static_cast<int>(r.num("solver.max_newton", cfg.solver.max_newton));
  cfg.solver.max_pseudo = static_cast<int>(r.num("solver.max_pseudo", cfg.solver.max_pseudo));
  cfg.solver.newton_switch = r.num("solver.newton_switch", cfg.solver.newton_switch);
  if (!(cfg.solver.tol > 0))
    throw Error(ErrorKind::Config, "solver.tol must be positive");

  cfg.noise_amplitude = r.num("init.noise_amplitude", 0.0);
  cfg.seed = static_cast<std::uint64_t>(r.num("init.seed", 1.0));
  if (cfg.noise_amplitude < 0.0 || cfg.noise_amplitude > 1.0)
    throw Error(ErrorKind::Config, "init.noise_amplitude must lie in [0, 1]");

  const bool half_plane = std::holds_alternative<HalfPlaneSpec>(cfg.boundary);
  const bool junction = std::holds_alternative<FourEndSpec>(cfg.boundary) ||
                        std::holds_alternative<MultiEndSpec>(cfg.boundary);
  cfg.checks.hamiltonian = r.boolean("checks.hamiltonian", true);
  cfg.checks.planar_flux =
      r.boolean("checks.planar_flux", std::holds_alternative<PlanarSpec>(cfg.boundary));
  // the vanishing moment is a statement about balanced junctions taken
  // about their canonical center; disks center on the mirror edge in
  // the half-plane configuration, so energy defaults off there
  cfg.checks.moment = r.boolean("checks.moment", junction);
  cfg.checks.modica = r.boolean("checks.modica", true);
  cfg.checks.energy = r.boolean("checks.energy", !half_plane);
  cfg.checks.levelset = r.boolean("checks.levelset", true);
  cfg.checks.decay = r.boolean("checks.decay", false);
  cfg.checks.symmetry = r.boolean("checks.symmetry", false);

  cfg.tol.hamiltonian = r.num("tolerances.hamiltonian", cfg.tol.hamiltonian);
  cfg.tol.planar_flux = r.num("tolerances.planar_flux", cfg.tol.planar_flux);
  cfg.tol.moment = r.num("tolerances.moment", cfg.tol.moment);
  cfg.tol.modica = r.num("tolerances.modica", cfg.tol.modica);
  cfg.tol.energy_slack = r.num("tolerances.energy_slack", cfg.tol.energy_slack);
  cfg.tol.balance = r.num("tolerances.balance", cfg.tol.balance);
  cfg.tol.decay_rel = r.num("tolerances.decay_rel", cfg.tol.decay_rel);
  cfg.tol.symmetry = r.num("tolerances.symmetry", cfg.tol.symmetry);

  cfg.out_dir = r.str("output.dir", "out");
  r.reject_unknown();
  return cfg;
}

// Seeded interior perturbation; boundary data stays untouched and the
// iterate stays inside [-1, 1]. Deterministic in row-major order.
inline void apply_noise(Field2D& f, double amplitude, std::uint64_t seed) {
  if (amplitude == 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int i_lo = f.neumann_left ? 0 : 1;
  for (int j = 1; j < f.grid.ny - 1; ++j)
    for (int i = i_lo; i < f.grid.nx - 1; ++i)
      f.at(i, j) = std::clamp(f.at(i, j) + amplitude * uni(rng), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Scenario execution and artifacts.
// ---------------------------------------------------------------------------

struct ScenarioResult {
  int exit_code = 0;  // 0 pass, 1 check failure, 2 config error, 3 solver failure
  bool pass = false;
  std::string run_dir;
  nlohmann::json report;
};

namespace detail {

inline nlohmann::json boundary_json(const BoundarySpec& spec) {
  nlohmann::json j;
  if (const auto* p = std::get_if<PlanarSpec>(&spec)) {
    j["kind"] = "planar";
    j["theta_deg"] = rad2deg(p->theta);
    j["offset"] = p->offset;
  } else if (const auto* fe = std::get_if<FourEndSpec>(&spec)) {
    j["kind"] = "fourend";
    j["theta_deg"] = rad2deg(fe->theta);
    j["offsets"] = fe->offsets;
  } else if (const auto* m = std::get_if<MultiEndSpec>(&spec)) {
    j["kind"] = "multiend";
    std::vector<double> ang, off;
    for (const auto& [a, c] : m->ends) {
      ang.push_back(rad2deg(a));
      off.push_back(c);
    }
    j["angles_deg"] = ang;
    j["offsets"] = off;
  } else if (const auto* hp = std::get_if<HalfPlaneSpec>(&spec)) {
    j["kind"] = "halfplane";
    j["theta_deg"] = rad2deg(hp->theta);
    j["offset"] = hp->offset;
  }
  return j;
}

// next unused run-NNNN directory (append-only; reruns never overwrite)
inline std::string claim_run_dir(const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (int k = 0; k < 100000; ++k) {
    std::ostringstream os;
    os << out_dir << "/run-" << std::setw(4) << std::setfill('0') << k;
    if (!fs::exists(os.str())) {
      fs::create_directories(os.str());
      return os.str();
    }
  }
  throw Error(ErrorKind::InvalidInput, "run directory space exhausted in " + out_dir);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  os << text;
}

inline std::string hash_hex(const std::string& text) {
  std::ostringstream os;
  os << std::hex << fnv1a(text);
  return os.str();
}

// mirror-extend a half-plane zero set across x = x0 so end fitting sees
// the full even configuration
inline std::vector<std::vector<Point>> mirror_extend(const ZeroSet& z, double x0) {
  auto polys = z.polylines;
  for (const auto& poly : z.polylines) {
    std::vector<Point> m;
    for (const auto& q : poly) m.push_back({2.0 * x0 - q.x, q.y});
    polys.push_back(std::move(m));
  }
  return polys;
}

}  // namespace detail

// Solve stage shared by the CLI paths: profile -> boundary -> relax.
struct SolvedScenario {
  Potential potential = Potential::quartic();
  Profile1D profile;
  Field2D field;
  SolveStats stats;
};

inline SolvedScenario solve_scenario(const ScenarioConfig& cfg) {
  SolvedScenario s{Potential::quartic(cfg.potential_scale), {}, {}, {}};
  s.profile = solve_profile(s.potential, cfg.profile_half_length, cfg.profile_step);
  const bool half = std::holds_alternative<HalfPlaneSpec>(cfg.boundary);
  const Grid2D grid = half ? Grid2D::half(cfg.lx, cfg.ly, cfg.hx, cfg.hy)
                           : Grid2D::centered(cfg.lx, cfg.ly, cfg.hx, cfg.hy);
  Field2D f0 = initial_field(cfg.boundary, grid, s.profile, s.potential);
  f0.bc_json = detail::boundary_json(cfg.boundary).dump();

  // reconnected junctions are index-1 critical points: replace the
  // crossing-lines iterate with the neck guess and hand straight to
  // Newton instead of letting the gradient flow pinch the narrow wedges
  SolveConfig solver = cfg.solver;
  double theta = -1.0;
  if (const auto* fe = std::get_if<FourEndSpec>(&cfg.boundary)) {
    const bool centered = fe->offsets == std::array<double, 4>{0, 0, 0, 0};
    if (centered && std::abs(fe->theta - kPi / 4.0) > 1e-9) theta = fe->theta;
  } else if (const auto* hp = std::get_if<HalfPlaneSpec>(&cfg.boundary)) {
    if (hp->offset == 0.0) theta = hp->theta;
  }
  if (theta > 0.0) {
    apply_junction_guess(f0, s.profile, theta, junction_neck(theta, s.potential));
    solver.newton_switch = 1e300;
  }

  apply_noise(f0, cfg.noise_amplitude, cfg.seed);
  s.field = relax(std::move(f0), s.potential, solver, &s.stats);
  return s;
}

// Full verification pipeline; writes snapshot + sidecar + report.json in
// a fresh run directory under cfg.out_dir and returns the summary.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  using nlohmann::json;
  ScenarioResult out;
  out.run_dir = detail::claim_run_dir(cfg.out_dir);

  json rep;
  rep["name"] = cfg.name;
  rep["tool_version"] = kToolVersion;
  rep["config_hash"] = detail::hash_hex(cfg.config_text);
  rep["seed"] = cfg.seed;
  rep["boundary"] = detail::boundary_json(cfg.boundary);

  auto finish = [&](int code) {
    out.exit_code = code;
    out.pass = (code == 0);
    rep["pass"] = out.pass;
    rep["exit_code"] = code;
    out.report = rep;
    detail::write_text(out.run_dir + "/report.json", rep.dump(2));
    return out;
  };

  SolvedScenario s;
  try {
    s = solve_scenario(cfg);
  } catch (const SolverError& e) {
    rep["error"] = e.what();
    if (e.best_field) save_snapshot(*e.best_field, out.run_dir + "/field.ac2");
    return finish(3);
  } catch (const Error& e) {
    rep["error"] = e.what();
    return finish(e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Geometry ? 2 : 1);
  }

  const auto& f = s.field;
  const auto& p = s.potential;
  rep["grid"] = {{"nx", f.grid.nx}, {"ny", f.grid.ny}, {"hx", f.grid.hx},
                 {"hy", f.grid.hy}, {"x0", f.grid.x0}, {"y0", f.grid.y0}};
  rep["residual"] = f.residual_max;
  rep["stats"] = {{"pseudo_steps", s.stats.pseudo_steps},
                  {"newton_steps", s.stats.newton_steps}};

  save_snapshot(f, out.run_dir + "/field.ac2");
  json side;
  side["boundary"] = detail::boundary_json(cfg.boundary);
  side["residual_max"] = f.residual_max;
  side["neumann_left"] = f.neumann_left;
  side["potential_id"] = p.id();
  detail::write_text(out.run_dir + "/field.json", side.dump(2));

  const double beta = p.beta();
  const double tol_ham = cfg.tol.hamiltonian > 0 ? cfg.tol.hamiltonian : 5e-3 * beta;
  const double tol_flux = cfg.tol.planar_flux > 0 ? cfg.tol.planar_flux : 1e-2 * beta;
  const double tol_mom = cfg.tol.moment > 0 ? cfg.tol.moment : 2e-3 * beta;
  const double slack = cfg.tol.energy_slack > 0 ? cfg.tol.energy_slack : 1e-6 * beta;

  bool all_pass = true;
  json checks = json::array();
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["name"] = name;
    detail["pass"] = pass;
    checks.push_back(detail);
    all_pass = all_pass && pass;
  };

  // center used by moment / energy / symmetry probes
  Point center{0.0, 0.0};
  const bool multi = std::holds_alternative<FourEndSpec>(cfg.boundary) ||
                     std::holds_alternative<MultiEndSpec>(cfg.boundary);

  try {
    if (multi && (cfg.checks.moment || cfg.checks.energy || cfg.checks.symmetry))
      center = canonical_center(f, p);
    rep["center"] = {center.x, center.y};

    if (cfg.checks.hamiltonian) {
      const auto h0 = hamiltonian_profile(f, p, 0.0);
      json detail = {{"deviation_theta0", h0.max_abs_deviation},
                     {"rho_theta0", h0.reference},
                     {"tolerance", tol_ham}};
      bool ok = h0.max_abs_deviation <= tol_ham;
      // the half-plane identity slices x = const only; horizontal chords
      // always end too close to a rising branch to resolve their tails
      if (!std::holds_alternative<HalfPlaneSpec>(cfg.boundary)) {
        const auto h1 = hamiltonian_profile(f, p, kPi / 2.0);
        detail["deviation_theta90"] = h1.max_abs_deviation;
        detail["rho_theta90"] = h1.reference;
        ok = ok && h1.max_abs_deviation <= tol_ham;
      }
      record("hamiltonian", ok, std::move(detail));
    }

    if (cfg.checks.planar_flux) {
      if (const auto* pl = std::get_if<PlanarSpec>(&cfg.boundary)) {
        const auto h0 = hamiltonian_profile(f, p, 0.0);
        const double want = beta * std::sin(pl->theta);
        record("planar_flux", std::abs(h0.reference - want) <= tol_flux,
               {{"rho", h0.reference}, {"expected", want}, {"tolerance", tol_flux}});
      }
    }

    if (cfg.checks.moment) {
      const auto m = moment_profile(f, p, 41, center);
      record("moment", m.max_abs_value <= tol_mom,
             {{"max_abs", m.max_abs_value}, {"tolerance", tol_mom}});
    }

    if (cfg.checks.modica) {
      const auto m = modica_check(f, p);
      record("modica", m.max_violation <= cfg.tol.modica,
             {{"max_violation", m.max_violation},
              {"at", {m.x, m.y}},
              {"tolerance", cfg.tol.modica}});
    }

    ZeroSet zero;
    std::vector<std::vector<Point>> fit_polys;
    if (cfg.checks.levelset || cfg.checks.decay || cfg.checks.energy) {
      zero = extract_zero_set(f);
      fit_polys = f.neumann_left ? detail::mirror_extend(zero, f.grid.x0)
                                 : zero.polylines;
    }

    int level_end_count = 0;
    if (cfg.checks.levelset) {
      const double w = p.interface_width();
      // with a mirror edge the fit sees the reflected extension, so the
      // distance to x = x0 does not cap the radius
      const double r_hi =
          0.9 * std::min({f.neumann_left ? 1e300 : center.x - f.grid.x0,
                          f.grid.x_max() - center.x, center.y - f.grid.y0,
                          f.grid.y_max() - center.y});
      ZeroSet zfit;
      zfit.grid = f.grid;
      zfit.polylines = fit_polys;
      auto ends = fit_ends(zfit, std::max(3.0 * w, 0.35 * r_hi), r_hi, center);
      level_end_count = static_cast<int>(ends.size());
      const double bal = balance_defect(ends);
      const double rot = rotated_balance_defect(ends);
      json ends_j = json::array();
      for (const auto& e : ends)
        ends_j.push_back({{"theta_deg", rad2deg(e.theta)},
                          {"offset", e.offset},
                          {"rms", e.rms},
                          {"npoints", e.npoints}});
      record("levelset",
             bal <= cfg.tol.balance && rot <= cfg.tol.balance * static_cast<double>(ends.size()),
             {{"ends", ends_j},
              {"balance_defect", bal},
              {"rotated_defect", rot},
              {"tolerance", cfg.tol.balance}});
    }

    if (cfg.checks.energy) {
      const double r_hi = 0.95 * std::min({center.x - f.grid.x0, f.grid.x_max() - center.x,
                                           center.y - f.grid.y0, f.grid.y_max() - center.y});
      std::vector<double> radii;
      const int n_radii = 20;
      const double r_lo = std::max(3.0 * p.interface_width(), r_hi / 4.0);
      for (int k = 0; k < n_radii; ++k)
        radii.push_back(r_lo + (r_hi - r_lo) * k / (n_radii - 1));
      const auto curve = energy_curve(f, p, radii, center);
      bool monotone = true;
      for (std::size_t k = 1; k < curve.energy_per_r.size(); ++k)
        monotone = monotone &&
                   curve.energy_per_r[k] >= curve.energy_per_r[k - 1] - slack;
      bool count_ok = true;  // quantization consistency when both commit
      if (cfg.checks.levelset && curve.end_count_estimate > 0 && level_end_count > 0)
        count_ok = (curve.end_count_estimate == level_end_count);
      record("energy", monotone && count_ok,
             {{"energy_per_r_last", curve.energy_per_r.back()},
              {"tail_slope", curve.tail_slope},
              {"end_count_estimate", curve.end_count_estimate},
              {"monotone", monotone},
              {"slack", slack}});
    }

    if (cfg.checks.decay) {
      const auto fit = decay_fit(f, p, zero.polylines);
      const double rel = std::abs(fit.nu - p.decay_rate()) / p.decay_rate();
      record("decay", rel <= cfg.tol.decay_rel,
             {{"nu", fit.nu},
              {"expected", p.decay_rate()},
              {"r2", fit.r2},
              {"samples", fit.samples},
              {"tolerance_rel", cfg.tol.decay_rel}});
    }

    if (cfg.checks.symmetry) {
      const auto sym = symmetry_report(f, p, center);
      const double worst = std::max(sym.y_mirror_defect, sym.x_mirror_defect);
      record("symmetry", worst <= cfg.tol.symmetry,
             {{"y_mirror_defect", sym.y_mirror_defect},
              {"x_mirror_defect", sym.x_mirror_defect},
              {"min_ux", sym.min_ux},
              {"max_uy", sym.max_uy},
              {"tolerance", cfg.tol.symmetry}});
    }
  } catch (const Error& e) {
    rep["checks"] = checks;
    rep["error"] = e.what();
    return finish(1);
  }

  rep["checks"] = checks;
  return finish(all_pass ? 0 : 1);
}

// ---------------------------------------------------------------------------
// Parameter sweep: re-run the scenario with one numeric key overridden,
// collecting scalar diagnostics per row. Row failures are recorded and
// the sweep continues.
// ---------------------------------------------------------------------------

struct SweepRow {
  double value = 0.0;
  int exit_code = 0;
  nlohmann::json report;
};

inline std::vector<SweepRow> sweep(const ConfigTable& base, const std::string& key,
                                   const std::vector<double>& values) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    ConfigTable t = base;
    if (!t.has(key))
      throw Error(ErrorKind::Config, "sweep parameter '" + key + "' is not a config key");
    if (t.kv[key].kind != ConfigValue::Kind::Number)
      throw Error(ErrorKind::Config, "sweep parameter '" + key + "' is not numeric");
    t.kv[key].num = v;
    std::ostringstream tag;
    tag << "\n# sweep " << key << " = " << v << "\n";
    t.raw += tag.str();  // distinct config hash per row
    SweepRow row;
    row.value = v;
    try {
      ScenarioConfig cfg = make_scenario(t);
      auto res = run_scenario(cfg);
      row.exit_code = res.exit_code;
      row.report = res.report;
    } catch (const Error& e) {
      row.exit_code = (e.kind() == ErrorKind::Config) ? 2
                      : (e.kind() == ErrorKind::Solver) ? 3
                                                        : 1;
      row.report = {{"error", e.what()}};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Flatten sweep rows into a CSV table of the scalar diagnostics.
inline std::string sweep_csv(const std::string& key, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(12);
  os << key
     << ",exit_code,pass,residual,rho_theta0,hamiltonian_dev,moment_max,"
        "modica_violation,balance_defect,end_count,energy_per_r_last,error\n";
  for (const auto& r : rows) {
    auto pick = [&](const char* check, const char* field) -> std::string {
      if (!r.report.contains("checks")) return "";
      for (const auto& c : r.report["checks"])
        if (c["name"] == check && c.contains(field)) {
          std::ostringstream v;
          v.precision(12);
          v << c[field].get<double>();
          return v.str();
        }
      return "";
    };
    os << r.value << "," << r.exit_code << ","
       << (r.exit_code == 0 ? "true" : "false") << ",";
    if (r.report.contains("residual")) os << r.report["residual"].get<double>();
    os << "," << pick("hamiltonian", "rho_theta0") << ","
       << pick("hamiltonian", "deviation_theta0") << ","
       << pick("moment", "max_abs") << "," << pick("modica", "max_violation")
       << "," << pick("levelset", "balance_defect") << ",";
    if (r.report.contains("checks"))
      for (const auto& c : r.report["checks"])
        if (c["name"] == "energy") os << c["end_count_estimate"].get<int>();
    os << "," << pick("energy", "energy_per_r_last") << ",";
    if (r.report.contains("error"))
      os << '"' << r.report["error"].get<std::string>() << '"';
    os << "\n";
  }
  return os.str();
}

}  // namespace ac2
