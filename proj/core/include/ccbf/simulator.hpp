#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccbf/scenario.hpp"

namespace ccbf {

// One control cycle. Everything up to `singular` is written to the trace CSV;
// the remaining fields are in-memory diagnostics.
struct TraceRecord {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  double T = 0.0;
  Vec4 u_ref = Vec4::Zero();
  Vec4 u_safe = Vec4::Zero();
  double h1 = 0.0;
  double h2 = 0.0;
  double min_nu0 = 0.0;
  double min_nu1 = 0.0;
  double min_nu2 = 0.0;
  double qp_cost = 0.0;
  double slack = 0.0;
  bool singular = false;

  Vec3 v_ref = Vec3::Zero();
  bool relaxed = false;
  double regressor_alignment = 0.0;  // lg_h1 . lg_h2
};

struct SimulationResult {
  std::vector<TraceRecord> trace;
  std::optional<std::string> abort_reason;
  double abort_time = 0.0;

  bool aborted() const { return abort_reason.has_value(); }
};

// Fixed-step closed loop: mission -> geometric controller -> safety filter ->
// plant, with the obstacle subset refreshed at map_rate.
SimulationResult run(const Scenario& sc);
// Same loop against an explicit obstacle map (sc.scene is ignored).
SimulationResult run(const Scenario& sc, const ObstacleMap& map);

// Mean speed over the last `window` seconds below `speed_tol` while the
// velocity reference magnitude stays constant over that window.
bool dead_end_check(const std::vector<TraceRecord>& trace, double window = 2.0,
                    double speed_tol = 0.05);

struct TraceSummary {
  std::size_t cycles = 0;
  double min_nu0 = 0.0;
  double min_nu1 = 0.0;
  double min_nu2 = 0.0;
  double min_h1 = 0.0;
  std::size_t singular_cycles = 0;
  std::size_t relaxed_cycles = 0;
  std::size_t relaxed_unflagged = 0;  // fallback engaged without a singular flag
  double total_cost = 0.0;
  std::size_t active_cycles = 0;  // qp_cost > 0
};

TraceSummary summarize(const std::vector<TraceRecord>& trace);

extern const char* const kTraceHeader;

void write_trace(const std::vector<TraceRecord>& trace,
                 const std::filesystem::path& path);
void write_trace(const std::vector<TraceRecord>& trace, std::ostream& out);
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

}  // namespace ccbf
