// ac2lab: numerical laboratory for entire 2D Allen-Cahn solutions.
//
// Subcommands:
//   profile1d  1D connecting layer, CSV samples + JSON summary
//   solve      relax a scenario, write snapshot + sidecar
//   verify     solve + run the enabled identity checks
//   levelset   solve + export the zero set and fitted end rays
//   sweep      re-run a scenario over one numeric parameter
//
// Exit codes: 0 pass, 1 check failure, 2 config error, 3 solver failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ac2/scenario.hpp"

using namespace ac2;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string scenario;
  std::string out;
  std::int64_t seed = -1;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_scenario = true) {
  auto* s = cmd->add_option("--scenario", o.scenario, "scenario config file");
  if (need_scenario) s->required();
  cmd->add_option("--out", o.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", o.seed, "RNG seed (overrides init.seed)");
  cmd->add_option("--threads", o.threads, "worker threads (runs are single-threaded)");
}

ScenarioConfig load_with_overrides(const CommonOpts& o, ConfigTable* table_out = nullptr) {
  ConfigTable t = load_config(o.scenario);
  if (!o.out.empty()) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::String;
    v.str = o.out;
    t.kv["output.dir"] = v;
  }
  if (o.seed >= 0) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Number;
    v.num = static_cast<double>(o.seed);
    t.kv["init.seed"] = v;
    t.raw += "\n# seed override " + std::to_string(o.seed) + "\n";
  }
  if (table_out) *table_out = t;
  return make_scenario(t);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  os << text;
}

int run_profile1d(const std::string& out_dir, double scale, double half_length,
                  double step) {
  const Potential p = Potential::quartic(scale);
  const Profile1D prof = solve_profile(p, half_length, step);
  std::filesystem::create_directories(out_dir);

  std::ostringstream csv;
  csv.precision(17);
  csv << "s,g,dg\n";
  for (std::size_t k = 0; k < prof.s.size(); ++k)
    csv << prof.s[k] << "," << prof.g[k] << "," << prof.dg[k] << "\n";
  write_file(out_dir + "/profile.csv", csv.str());

  json j;
  j["tool_version"] = kToolVersion;
  j["potential_id"] = p.id();
  j["beta_num"] = energy_1d(prof, p);
  j["beta_exact"] = p.beta();
  j["equipartition_residual"] = equipartition_residual(prof, p);
  j["half_length"] = half_length;
  j["step"] = step;
  write_file(out_dir + "/profile.json", j.dump(2));
  std::cout << "profile1d: beta_num = " << j["beta_num"].get<double>()
            << ", equipartition residual = "
            << j["equipartition_residual"].get<double>() << "\n";
  return 0;
}

int run_solve(const ScenarioConfig& cfg) {
  const std::string dir = detail::claim_run_dir(cfg.out_dir);
  json rep;
  rep["name"] = cfg.name;
  rep["tool_version"] = kToolVersion;
  rep["config_hash"] = detail::hash_hex(cfg.config_text);
  rep["seed"] = cfg.seed;
  try {
    SolvedScenario s = solve_scenario(cfg);
    save_snapshot(s.field, dir + "/field.ac2");
    json side;
    side["boundary"] = detail::boundary_json(cfg.boundary);
    side["residual_max"] = s.field.residual_max;
    side["neumann_left"] = s.field.neumann_left;
    side["potential_id"] = s.potential.id();
    write_file(dir + "/field.json", side.dump(2));
    rep["residual"] = s.field.residual_max;
    rep["grid"] = {{"nx", s.field.grid.nx}, {"ny", s.field.grid.ny},
                   {"hx", s.field.grid.hx}, {"hy", s.field.grid.hy}};
    rep["pass"] = true;
    write_file(dir + "/report.json", rep.dump(2));
    std::cout << "solved: residual " << s.field.residual_max << " -> " << dir << "\n";
    return 0;
  } catch (const SolverError& e) {
    if (e.best_field) save_snapshot(*e.best_field, dir + "/field.ac2");
    rep["pass"] = false;
    rep["error"] = e.what();
    write_file(dir + "/report.json", rep.dump(2));
    std::cerr << "solver failure: " << e.what() << " (partial state in " << dir
              << ")\n";
    return 3;
  }
}

int run_verify(const ScenarioConfig& cfg) {
  const ScenarioResult res = run_scenario(cfg);
  if (res.report.contains("checks"))
    for (const auto& c : res.report["checks"])
      std::cout << (c["pass"].get<bool>() ? "PASS" : "FAIL") << "  "
                << c["name"].get<std::string>() << "\n";
  if (res.report.contains("error"))
    std::cerr << "error: " << res.report["error"].get<std::string>() << "\n";
  std::cout << (res.pass ? "verify: all checks passed" : "verify: FAILED")
            << " -> " << res.run_dir << "\n";
  return res.exit_code;
}

int run_levelset(const ScenarioConfig& cfg) {
  SolvedScenario s;
  try {
    s = solve_scenario(cfg);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  const std::string dir = detail::claim_run_dir(cfg.out_dir);
  save_snapshot(s.field, dir + "/field.ac2");
  const ZeroSet z = extract_zero_set(s.field);

  std::ostringstream csv;
  csv.precision(17);
  csv << "polyline,x,y\n";
  for (std::size_t k = 0; k < z.polylines.size(); ++k)
    for (const auto& q : z.polylines[k])
      csv << k << "," << q.x << "," << q.y << "\n";
  write_file(dir + "/zeroset.csv", csv.str());

  json j;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = detail::hash_hex(cfg.config_text);
  j["polylines"] = z.polylines.size();
  j["points"] = z.total_points();
  try {
    const Field2D& f = s.field;
    const bool junction = std::holds_alternative<FourEndSpec>(cfg.boundary) ||
                          std::holds_alternative<MultiEndSpec>(cfg.boundary);
    const Point c = junction ? canonical_center(f, s.potential) : Point{0.0, 0.0};
    const double r_hi =
        0.9 * std::min({f.neumann_left ? 1e300 : c.x - f.grid.x0,
                        f.grid.x_max() - c.x, c.y - f.grid.y0, f.grid.y_max() - c.y});
    const double r_lo = std::max(3.0 * s.potential.interface_width(), 0.35 * r_hi);
    auto ends = fit_ends(z, r_lo, r_hi, c);
    json ej = json::array();
    for (const auto& e : ends)
      ej.push_back({{"theta_deg", rad2deg(e.theta)},
                    {"offset", e.offset},
                    {"rms", e.rms},
                    {"npoints", e.npoints}});
    j["ends"] = ej;
    j["balance_defect"] = balance_defect(ends);
  } catch (const Error& e) {
    j["ends_error"] = e.what();
  }
  write_file(dir + "/ends.json", j.dump(2));
  std::cout << "levelset: " << z.polylines.size() << " polylines, "
            << z.total_points() << " points -> " << dir << "\n";
  return 0;
}

int run_sweep(const ConfigTable& base, const std::string& out_dir,
              const std::string& key, const std::vector<double>& values) {
  const auto rows = sweep(base, key, values);
  const std::string csv = sweep_csv(key, rows);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/sweep.csv", csv);
  std::cout << csv;
  for (const auto& r : rows)
    if (r.exit_code != 0) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for entire 2D Allen-Cahn solutions"};
  app.require_subcommand(1);

  // profile1d
  auto* prof_cmd = app.add_subcommand("profile1d", "solve the 1D connecting layer");
  std::string prof_out = ".";
  double prof_scale = 1.0, prof_len = 12.0, prof_step = 0.01;
  prof_cmd->add_option("--out", prof_out, "output directory");
  prof_cmd->add_option("--scale", prof_scale, "potential scale factor");
  prof_cmd->add_option("--half-length", prof_len, "profile half length");
  prof_cmd->add_option("--step", prof_step, "profile grid step");

  CommonOpts solve_o, verify_o, level_o, sweep_o;
  auto* solve_cmd = app.add_subcommand("solve", "relax a scenario to a solution");
  add_common(solve_cmd, solve_o);
  auto* verify_cmd = app.add_subcommand("verify", "solve and run identity checks");
  add_common(verify_cmd, verify_o);
  auto* level_cmd = app.add_subcommand("levelset", "export zero set and end rays");
  add_common(level_cmd, level_o);
  auto* sweep_cmd = app.add_subcommand("sweep", "scan one numeric config key");
  add_common(sweep_cmd, sweep_o);
  std::string sweep_key;
  std::vector<double> sweep_values;
  sweep_cmd->add_option("--param", sweep_key, "config key to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "values to scan")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (prof_cmd->parsed())
      return run_profile1d(prof_out, prof_scale, prof_len, prof_step);
    if (solve_cmd->parsed()) return run_solve(load_with_overrides(solve_o));
    if (verify_cmd->parsed()) return run_verify(load_with_overrides(verify_o));
    if (level_cmd->parsed()) return run_levelset(load_with_overrides(level_o));
    if (sweep_cmd->parsed()) {
      ConfigTable t;
      ScenarioConfig cfg = load_with_overrides(sweep_o, &t);
      return run_sweep(t, cfg.out_dir, sweep_key, sweep_values);
    }
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << (e.kind() == ErrorKind::Config ? "config error: " : "error: ")
              << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 2 : 1;
  }
  return 2;
}
