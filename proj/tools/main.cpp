// ccbf: run closed-loop scenarios, timing studies, invariant suites and single
// filter evaluations from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccbf/bench.hpp"
#include "ccbf/filter.hpp"
#include "ccbf/scenario.hpp"
#include "ccbf/simulator.hpp"
#include "checks.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Optional overrides for every tabulated filter parameter.
struct ParameterFlags {
  std::optional<double> p0, p1, alpha1, gamma, kappa, epsilon, alpha2, epsilon_T;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--p0", p0, "first chain pole (< 0)");
    cmd->add_option("--p1", p1, "second chain pole (< 0)");
    cmd->add_option("--alpha1", alpha1, "composite barrier class-K gain");
    cmd->add_option("--gamma", gamma, "tanh saturation scale");
    cmd->add_option("--kappa", kappa, "soft-min sharpness");
    cmd->add_option("--epsilon", epsilon, "obstacle clearance radius [m]");
    cmd->add_option("--alpha2", alpha2, "thrust barrier gain");
    cmd->add_option("--epsilon_T", epsilon_T, "minimum thrust [N]");
  }

  void apply(ccbf::ChainParams& chain, ccbf::CompositeParams& cp,
             ccbf::ThrustBarrierParams& tp) const {
    if (p0) chain.p0 = *p0;
    if (p1) chain.p1 = *p1;
    if (epsilon) chain.epsilon = *epsilon;
    if (alpha1) cp.alpha1 = *alpha1;
    if (gamma) cp.gamma = *gamma;
    if (kappa) cp.kappa = *kappa;
    if (alpha2) tp.alpha2 = *alpha2;
    if (epsilon_T) tp.epsilon_T = *epsilon_T;
  }
};

ccbf::Vec3 vec3_from(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw std::invalid_argument(std::string("state key '") + key + "' must have 3 entries");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json to_json(const ccbf::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const ccbf::Vec4& v) { return json::array({v(0), v(1), v(2), v(3)}); }

int run_simulate(const std::string& scenario_path, const std::string& preset,
                 const std::string& out_path, const std::string& dump_path,
                 const ParameterFlags& flags, bool no_filter,
                 std::optional<double> duration) {
  ccbf::Scenario sc;
  if (!scenario_path.empty()) {
    sc = ccbf::load_scenario(scenario_path);
  } else if (preset == "corridor") {
    sc = ccbf::corridor_scenario();
  } else if (preset == "forest") {
    sc = ccbf::forest_scenario();
  } else {
    std::cerr << "simulate: give --scenario or --preset corridor|forest\n";
    return kExitUsage;
  }
  flags.apply(sc.chain, sc.composite, sc.thrust);
  sc.scene.epsilon = sc.chain.epsilon;
  if (no_filter) sc.filter_enabled = false;
  if (duration) sc.duration = *duration;
  sc.validate();
  if (!dump_path.empty()) {
    std::ofstream f(dump_path);
    if (!f) throw std::runtime_error("cannot write " + dump_path);
    f << ccbf::scenario_to_json(sc) << '\n';
  }

  const ccbf::SimulationResult res = ccbf::run(sc);
  if (!out_path.empty()) ccbf::write_trace(res.trace, out_path);
  const ccbf::TraceSummary s = ccbf::summarize(res.trace);
  std::cout << "cycles " << s.cycles << "\n"
            << "min_nu0 " << s.min_nu0 << "\nmin_nu1 " << s.min_nu1
            << "\nmin_nu2 " << s.min_nu2 << "\nmin_h1 " << s.min_h1 << "\n"
            << "active_cycles " << s.active_cycles << "\n"
            << "singular_cycles " << s.singular_cycles << "\n"
            << "relaxed_cycles " << s.relaxed_cycles << "\n";
  if (res.aborted()) {
    std::cerr << "simulation aborted at t=" << res.abort_time << ": "
              << *res.abort_reason << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

int run_bench_cmd(const std::vector<int>& counts, int reps, int warmup,
                  const std::string& mode, int threads, const std::string& out_path) {
  ccbf::BenchConfig cfg;
  cfg.obstacle_counts = counts;
  cfg.repetitions = reps;
  cfg.warmup = warmup;
  cfg.mode = ccbf::bench_mode_from_string(mode);
  cfg.threads = threads;
  const ccbf::BenchResult r = ccbf::run_bench(cfg);
  if (!out_path.empty()) ccbf::report(r, out_path);
  ccbf::report(r, std::cout);
  return kExitOk;
}

int run_check(const std::string& suite, const ccbf::checks::CheckOptions& opts) {
  bool ok = true;
  for (const auto& o : ccbf::checks::run_suite(suite, opts)) {
    std::cout << (o.passed ? "PASS " : "FAIL ") << o.suite << ": " << o.detail << "\n";
    ok = ok && o.passed;
  }
  return ok ? kExitOk : kExitDomain;
}

int run_filter_step(const std::string& state_arg, const std::string& obstacles_path,
                    int k, const ParameterFlags& flags) {
  std::string text = state_arg;
  if (text.find('{') == std::string::npos) {
    std::ifstream f(state_arg);
    if (!f) throw std::runtime_error("cannot open state file " + state_arg);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  const json j = json::parse(text);
  for (const auto& [key, value] : j.items()) {
    if (key != "x" && key != "v" && key != "R" && key != "yaw" && key != "T" &&
        key != "u_ref") {
      throw std::invalid_argument("unknown state key '" + key + "'");
    }
  }
  ccbf::FilterParams fp;
  flags.apply(fp.chain, fp.composite, fp.thrust);

  ccbf::VehicleState s;
  if (j.contains("x")) s.x = vec3_from(j, "x");
  if (j.contains("v")) s.v = vec3_from(j, "v");
  if (j.contains("yaw")) s.R = ccbf::rot_z(j.at("yaw").get<double>());
  if (j.contains("R")) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) s.R(r, c) = j.at("R").at(r).at(c).get<double>();
    }
    if (!ccbf::is_rotation(s.R, 1e-6)) throw std::invalid_argument("R is not a rotation");
  }
  s.T = j.value("T", fp.vehicle.hover_thrust());
  ccbf::RateThrustInput u_ref;
  if (j.contains("u_ref")) {
    const json& u = j.at("u_ref");
    if (!u.is_array() || u.size() != 4) throw std::invalid_argument("u_ref needs 4 entries");
    u_ref = ccbf::RateThrustInput::from_vector(ccbf::Vec4(
        u[0].get<double>(), u[1].get<double>(), u[2].get<double>(), u[3].get<double>()));
  }

  ccbf::ObstacleMap map;
  map.epsilon = fp.chain.epsilon;
  if (!obstacles_path.empty()) {
    map = ccbf::k_nearest(ccbf::load_obstacles(obstacles_path, fp.chain.epsilon), s.x, k);
  }
  const ccbf::FilterStepOutput out = ccbf::filter_step(s, map, u_ref, fp);

  const auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(); };
  json chains = json::array();
  double min0 = INFINITY, min1 = INFINITY, min2 = INFINITY;
  for (const auto& c : out.eval.chains) {
    min0 = std::min(min0, c.nu0);
    min1 = std::min(min1, c.nu1);
    min2 = std::min(min2, c.nu2);
  }
  const auto geom = ccbf::virtual_obstacle_geometry(out.eval, s);
  json doc = {
      {"obstacles", map.size()},
      {"h1", finite_or_null(out.eval.h1)},
      {"lf_h1", out.eval.lf_h1},
      {"lg_h1", to_json(out.eval.lg_h1)},
      {"x_hat", to_json(out.eval.x_hat)},
      {"weight_sum", out.eval.weight_sum},
      {"h2", out.eval.thrust.h2},
      {"b2", out.eval.thrust.b2},
      {"min_nu0", finite_or_null(min0)},
      {"min_nu1", finite_or_null(min1)},
      {"min_nu2", finite_or_null(min2)},
      {"u_ref", to_json(u_ref.as_vector())},
      {"u_safe", to_json(out.result.u_safe)},
      {"cost", out.result.cost},
      {"collision_active", out.result.collision_active},
      {"thrust_active", out.result.thrust_active},
      {"multipliers", json::array({out.result.multipliers(0), out.result.multipliers(1)})},
      {"slack", out.result.slack},
      {"relaxed", out.result.relaxed},
      {"singular", out.result.singular},
      {"virtual_obstacle_above", geom.above},
      {"normalized_colinearity", geom.normalized_colinearity},
  };
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite control barrier function safety filter for multirotors"};
  app.require_subcommand(1);

  ParameterFlags sim_flags;
  std::string scenario_path, preset, trace_out, dump_path;
  bool no_filter = false;
  std::optional<double> duration;
  auto* simulate = app.add_subcommand("simulate", "run a closed-loop scenario");
  simulate->add_option("--scenario", scenario_path, "scenario JSON file");
  simulate->add_option("--preset", preset, "built-in scenario: corridor | forest");
  simulate->add_option("--out", trace_out, "trace CSV output");
  simulate->add_option("--write-scenario", dump_path, "write the resolved scenario JSON");
  simulate->add_flag("--no-filter", no_filter, "bypass the safety filter (control run)");
  simulate->add_option("--duration", duration, "override scenario duration [s]");
  sim_flags.add_to(simulate);

  std::vector<int> counts = {10, 100, 1000, 10000};
  int reps = 30, warmup = 3, threads = 1;
  std::string mode = "both", bench_out;
  auto* bench = app.add_subcommand("bench", "time composite barrier assembly");
  bench->add_option("--counts", counts, "obstacle counts")->delimiter(',');
  bench->add_option("--reps", reps, "timed repetitions per cell (>= 10)");
  bench->add_option("--warmup", warmup, "untimed warm-up calls");
  bench->add_option("--mode", mode, "analytic | numeric | both")
      ->check(CLI::IsMember({"analytic", "numeric", "both"}));
  bench->add_option("--threads", threads, "threads for the analytic reduction");
  bench->add_option("--out", bench_out, "report CSV output");

  std::string suite = "all";
  ccbf::checks::CheckOptions check_opts;
  auto* check = app.add_subcommand("check", "run invariant suites");
  check->add_option("--suite", suite, "gradients | weights | qp | dynamics | all");
  check->add_option("--samples", check_opts.samples, "samples per suite");
  check->add_option("--seed", check_opts.seed, "random seed");
  check->add_option("--perturb-analytic", check_opts.analytic_bias,
                    "bias added to analytic Lf h1 (exercises the failure path)");

  ParameterFlags step_flags;
  std::string state_arg, obstacles_path;
  int k = 400;
  auto* fstep = app.add_subcommand("filter-step", "evaluate one safety-filter step");
  fstep->add_option("--state", state_arg, "state JSON (file path or inline)")->required();
  fstep->add_option("--obstacles", obstacles_path, "obstacle CSV");
  fstep->add_option("--k", k, "nearest obstacles used");
  step_flags.add_to(fstep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      return run_simulate(scenario_path, preset, trace_out, dump_path, sim_flags,
                          no_filter, duration);
    }
    if (*bench) return run_bench_cmd(counts, reps, warmup, mode, threads, bench_out);
    if (*check) return run_check(suite, check_opts);
    if (*fstep) return run_filter_step(state_arg, obstacles_path, k, step_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
