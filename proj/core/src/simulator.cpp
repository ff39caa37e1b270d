#include "ccbf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace ccbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void fill_constraint_minima(TraceRecord& rec, const BarrierEvaluation& eval) {
  rec.min_nu0 = rec.min_nu1 = rec.min_nu2 = kInf;
  for (const ChainValues& c : eval.chains) {
    rec.min_nu0 = std::min(rec.min_nu0, c.nu0);
    rec.min_nu1 = std::min(rec.min_nu1, c.nu1);
    rec.min_nu2 = std::min(rec.min_nu2, c.nu2);
  }
}

}  // namespace

SimulationResult run(const Scenario& sc) { return run(sc, generate_scene(sc.scene)); }

SimulationResult run(const Scenario& sc, const ObstacleMap& scene_map) {
  sc.validate();
  ObstacleMap map = scene_map;
  map.epsilon = sc.chain.epsilon;

  const double dt = 1.0 / sc.control_rate;
  const long cycles = std::lround(sc.duration * sc.control_rate);
  const long map_period =
      std::max(1L, std::lround(sc.control_rate / sc.map_rate));
  const FilterParams fp = sc.filter_params();

  Integrator integrator(sc.vehicle);
  GeometricController controller(sc.gains, sc.vehicle, dt);
  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Mission mission = sc.mission;
  VehicleState s = sc.initial_state();
  if (mission.kind == MissionKind::kHover) mission.waypoint = s.x;

  SimulationResult result;
  result.trace.reserve(static_cast<std::size_t>(cycles));
  ObstacleMap active;
  active.epsilon = map.epsilon;
  std::optional<Vec3> nearest;

  for (long k = 0; k < cycles; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k % map_period == 0) {
      active = k_nearest(map, s.x, sc.k_nearest);
      nearest = active.empty() ? std::nullopt : std::optional<Vec3>(active.points.front());
    }

    TrackingSetpoint sp = mission_setpoint(t, mission, s, nearest);
    if (sc.velocity_noise > 0.0) {
      sp.v_d += sc.velocity_noise * Vec3(noise(rng), noise(rng), noise(rng));
    }

    RateThrustInput u_ref;
    try {
      u_ref = controller.update(s, sp);
    } catch (const ControllerSingularity& e) {
      result.abort_reason = std::string("controller singularity: ") + e.what();
      result.abort_time = t;
      break;
    }

    const FilterStepOutput out = filter_step(s, active, u_ref, fp);

    TraceRecord rec;
    rec.t = t;
    rec.x = s.x;
    rec.v = s.v;
    rec.q = Eigen::Quaterniond(s.R).normalized();
    rec.T = s.T;
    rec.u_ref = u_ref.as_vector();
    rec.h1 = out.eval.h1;
    rec.h2 = out.eval.thrust.h2;
    fill_constraint_minima(rec, out.eval);
    rec.singular = out.result.singular;
    rec.v_ref = sp.v_d;
    if (out.eval.has_collision_row()) {
      rec.regressor_alignment = out.eval.lg_h1.dot(out.eval.thrust.lg_h2);
    }

    RateThrustInput u_apply = u_ref;
    if (sc.filter_enabled) {
      u_apply = out.u_safe;
      rec.qp_cost = out.result.cost;
      rec.slack = out.result.slack;
      rec.relaxed = out.result.relaxed;
    }
    rec.u_safe = u_apply.as_vector();
    result.trace.push_back(rec);

    const double h = dt / sc.substeps;
    for (int i = 0; i < sc.substeps; ++i) s = integrator.advance(s, u_apply, h);
    if (!is_finite(s)) {
      result.abort_reason = "non-finite vehicle state";
      result.abort_time = t + dt;
      break;
    }
  }
  return result;
}

bool dead_end_check(const std::vector<TraceRecord>& trace, double window,
                    double speed_tol) {
  if (trace.empty() || trace.back().t - trace.front().t < window) {
    throw std::invalid_argument("dead_end_check: trace shorter than the window");
  }
  const double t_start = trace.back().t - window;
  double speed_sum = 0.0;
  std::size_t n = 0;
  const double ref_speed = trace.back().v_ref.norm();
  bool reference_held = true;
  for (auto it = trace.rbegin(); it != trace.rend() && it->t > t_start; ++it) {
    speed_sum += it->v.norm();
    ++n;
    reference_held = reference_held && std::abs(it->v_ref.norm() - ref_speed) < 1e-9;
  }
  return reference_held && speed_sum / static_cast<double>(n) < speed_tol;
}

TraceSummary summarize(const std::vector<TraceRecord>& trace) {
  TraceSummary s;
  s.cycles = trace.size();
  s.min_nu0 = s.min_nu1 = s.min_nu2 = s.min_h1 = kInf;
  for (const TraceRecord& r : trace) {
    s.min_nu0 = std::min(s.min_nu0, r.min_nu0);
    s.min_nu1 = std::min(s.min_nu1, r.min_nu1);
    s.min_nu2 = std::min(s.min_nu2, r.min_nu2);
    s.min_h1 = std::min(s.min_h1, r.h1);
    s.singular_cycles += r.singular ? 1 : 0;
    s.relaxed_cycles += r.relaxed ? 1 : 0;
    s.relaxed_unflagged += (r.relaxed && !r.singular) ? 1 : 0;
    s.total_cost += r.qp_cost;
    s.active_cycles += r.qp_cost > 0.0 ? 1 : 0;
  }
  return s;
}

const char* const kTraceHeader =
    "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,T,p_ref,q_ref,r_ref,tau_ref,p_safe,q_safe,"
    "r_safe,tau_safe,h1,h2,min_nu0,min_nu1,min_nu2,qp_cost,slack,singular";

void write_trace(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  out << std::setprecision(17);
  for (const TraceRecord& r : trace) {
    out << r.t << ',' << r.x.x() << ',' << r.x.y() << ',' << r.x.z() << ','
        << r.v.x() << ',' << r.v.y() << ',' << r.v.z() << ',' << r.q.w() << ','
        << r.q.x() << ',' << r.q.y() << ',' << r.q.z() << ',' << r.T;
    for (int i = 0; i < 4; ++i) out << ',' << r.u_ref(i);
    for (int i = 0; i < 4; ++i) out << ',' << r.u_safe(i);
    out << ',' << r.h1 << ',' << r.h2 << ',' << r.min_nu0 << ',' << r.min_nu1
        << ',' << r.min_nu2 << ',' << r.qp_cost << ',' << r.slack << ','
        << (r.singular ? 1 : 0) << '\n';
  }
}

void write_trace(const std::vector<TraceRecord>& trace,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file " + path.string());
  write_trace(trace, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing trace file " + path.string());
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("unexpected trace header in " + path.string());
  }
  std::vector<TraceRecord> trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(std::strtod(cell.c_str(), nullptr));
    if (f.size() != 28) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 28 columns");
    }
    TraceRecord r;
    r.t = f[0];
    r.x = Vec3(f[1], f[2], f[3]);
    r.v = Vec3(f[4], f[5], f[6]);
    r.q = Eigen::Quaterniond(f[7], f[8], f[9], f[10]);
    r.T = f[11];
    r.u_ref = Vec4(f[12], f[13], f[14], f[15]);
    r.u_safe = Vec4(f[16], f[17], f[18], f[19]);
    r.h1 = f[20];
    r.h2 = f[21];
    r.min_nu0 = f[22];
    r.min_nu1 = f[23];
    r.min_nu2 = f[24];
    r.qp_cost = f[25];
    r.slack = f[26];
    r.singular = f[27] != 0.0;
    trace.push_back(r);
  }
  return trace;
}

}  // namespace ccbf
