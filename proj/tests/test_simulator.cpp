#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccbf/simulator.hpp"

namespace ccbf {
namespace {

namespace fs = std::filesystem;

Scenario hover_scenario(double duration = 10.0) {
  Scenario sc;
  sc.scene.kind = SceneKind::kRandomBox;
  sc.scene.count = 0;
  sc.mission.kind = MissionKind::kHover;
  sc.initial.x = Vec3(0.5, -0.2, -1.5);
  sc.duration = duration;
  return sc;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

TEST(Run, HoverHoldsPositionAndFilterIdles) {
  const Scenario sc = hover_scenario();
  const SimulationResult r = run(sc);
  ASSERT_FALSE(r.aborted());
  ASSERT_EQ(r.trace.size(), 1000u);
  EXPECT_LT((r.trace.back().x - sc.initial.x).norm(), 0.01);
  const TraceSummary sum = summarize(r.trace);
  EXPECT_EQ(sum.total_cost, 0.0);
  EXPECT_EQ(sum.active_cycles, 0u);
}

TEST(Run, HoverRecoversFromAttitudeOffset) {
  Scenario sc = hover_scenario();
  sc.initial.R = rot_x(0.2) * rot_z(0.4);
  sc.initial.v = Vec3(0.3, 0.0, -0.2);
  const SimulationResult r = run(sc);
  ASSERT_FALSE(r.aborted());
  EXPECT_LT((r.trace.back().x - sc.initial.x).norm(), 0.01);
  EXPECT_LT(r.trace.back().v.norm(), 1e-3);
}

TEST(Run, TimeIsMonotone) {
  const SimulationResult r = run(hover_scenario(1.0));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i].t, r.trace[i - 1].t);
}

TEST(Run, AbortsOnFreeFallCommand) {
  Scenario sc = hover_scenario(1.0);
  // Velocity error exactly cancels gravity in the commanded force.
  sc.initial.v = Vec3(0, 0, -sc.vehicle.hover_thrust() / sc.gains.kv.z());
  const SimulationResult r = run(sc);
  ASSERT_TRUE(r.aborted());
  EXPECT_NE(r.abort_reason->find("singularity"), std::string::npos);
  EXPECT_EQ(r.abort_time, 0.0);
}

TEST(Run, ShortCorridorIsSafeAndDeterministic) {
  Scenario sc = corridor_scenario();
  sc.duration = 5.0;
  const SimulationResult a = run(sc);
  const SimulationResult b = run(sc);
  ASSERT_EQ(a.trace.size(), 500u);
  std::ostringstream sa, sb;
  write_trace(a.trace, sa);
  write_trace(b.trace, sb);
  EXPECT_EQ(sa.str(), sb.str());
  const TraceSummary sum = summarize(a.trace);
  EXPECT_GE(sum.min_nu0, 0.0);
  EXPECT_GE(sum.min_nu1, 0.0);
  EXPECT_GE(sum.min_nu2, 0.0);
}

TEST(Run, ThreadCountDoesNotChangeTrace) {
  Scenario sc = corridor_scenario();
  sc.duration = 2.0;
  const SimulationResult a = run(sc);
  sc.threads = 3;
  const SimulationResult b = run(sc);
  std::ostringstream sa, sb;
  write_trace(a.trace, sa);
  write_trace(b.trace, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Run, ObstacleFreeFlightKeepsFilterIdle) {
  Scenario sc = corridor_scenario();
  sc.scene.count = 0;
  sc.duration = 5.0;
  const SimulationResult r = run(sc);
  EXPECT_EQ(summarize(r.trace).total_cost, 0.0);
  EXPECT_NEAR(r.trace.back().v.x(), 1.0, 1e-3);
}

TEST(DeadEnd, OpenCorridorKeepsMoving) {
  Scenario sc = corridor_scenario();
  sc.scene.dead_end = false;
  sc.duration = 8.0;
  const SimulationResult r = run(sc);
  EXPECT_FALSE(dead_end_check(r.trace));
}

TEST(DeadEnd, HoverIsVacuouslyTrue) {
  const SimulationResult r = run(hover_scenario(3.0));
  EXPECT_TRUE(dead_end_check(r.trace));
}

TEST(DeadEnd, ShortTraceThrows) {
  const SimulationResult r = run(hover_scenario(1.5));
  EXPECT_THROW(dead_end_check(r.trace), std::invalid_argument);
  EXPECT_THROW(dead_end_check({}), std::invalid_argument);
}

TEST(DeadEnd, ChangingReferenceFails) {
  std::vector<TraceRecord> trace(300);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace[i].t = 0.01 * static_cast<double>(i);
    trace[i].v_ref = Vec3(i % 2 ? 1.0 : 0.5, 0, 0);
  }
  EXPECT_FALSE(dead_end_check(trace));
  for (TraceRecord& r : trace) r.v_ref = Vec3(1, 0, 0);
  EXPECT_TRUE(dead_end_check(trace));
}

TEST(TraceIo, EmptyTraceIsHeaderOnly) {
  const fs::path p = fs::temp_directory_path() / "ccbf_empty_trace.csv";
  write_trace({}, p);
  EXPECT_EQ(count_lines(p), 1u);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kTraceHeader);
  EXPECT_TRUE(read_trace(p).empty());
}

TEST(TraceIo, HeaderColumns) {
  const std::string h = kTraceHeader;
  EXPECT_EQ(std::count(h.begin(), h.end(), ','), 27);
  EXPECT_EQ(h.rfind("t,x,y,z,vx,vy,vz,qw,qx,qy,qz,T,", 0), 0u);
  EXPECT_NE(h.find("min_nu0,min_nu1,min_nu2,qp_cost,slack,singular"), std::string::npos);
}

TEST(TraceIo, RoundTripAndLineCount) {
  Scenario sc = corridor_scenario();
  sc.duration = 60.0;
  sc.scene.count = 200;
  const SimulationResult r = run(sc);
  ASSERT_EQ(r.trace.size(), 6000u);
  const fs::path p = fs::temp_directory_path() / "ccbf_trace.csv";
  write_trace(r.trace, p);
  EXPECT_EQ(count_lines(p), 6001u);

  const std::vector<TraceRecord> back = read_trace(p);
  ASSERT_EQ(back.size(), r.trace.size());
  for (std::size_t i = 0; i < back.size(); i += 37) {
    const TraceRecord& a = r.trace[i];
    const TraceRecord& b = back[i];
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.q.coeffs(), b.q.coeffs());
    EXPECT_EQ(a.T, b.T);
    EXPECT_EQ(a.u_ref, b.u_ref);
    EXPECT_EQ(a.u_safe, b.u_safe);
    EXPECT_EQ(a.h1, b.h1);
    EXPECT_EQ(a.h2, b.h2);
    EXPECT_EQ(a.min_nu0, b.min_nu0);
    EXPECT_EQ(a.min_nu2, b.min_nu2);
    EXPECT_EQ(a.qp_cost, b.qp_cost);
    EXPECT_EQ(a.slack, b.slack);
    EXPECT_EQ(a.singular, b.singular);
  }
}

TEST(TraceIo, InfiniteBarrierValuesSurvive) {
  const SimulationResult r = run(hover_scenario(0.05));
  const fs::path p = fs::temp_directory_path() / "ccbf_trace_inf.csv";
  write_trace(r.trace, p);
  const std::vector<TraceRecord> back = read_trace(p);
  ASSERT_FALSE(back.empty());
  EXPECT_TRUE(std::isinf(back[0].h1));
  EXPECT_TRUE(std::isinf(back[0].min_nu0));
}

TEST(TraceIo, RejectsForeignHeader) {
  const fs::path p = fs::temp_directory_path() / "ccbf_trace_bad.csv";
  std::ofstream(p) << "a,b,c\n1,2,3\n";
  EXPECT_THROW(read_trace(p), std::runtime_error);
}

}  // namespace
}  // namespace ccbf
