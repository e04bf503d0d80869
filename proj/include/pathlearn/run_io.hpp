#pragma once

#include <string>
#include <vector>

#include "pathlearn/sim.hpp"

namespace pathlearn {

/// On-disk layout of one simulated scenario under <dir>/:
///   manifest.json          scenario name, seed, run ids and conditions
///   run_<id>.csv           experience log: vertex_id, t, v, omega, v_cmd,
///                          omega_cmd, g_v, g_omega (one row per sample)
///   track_<id>.csv         per-step closed-loop trace incl. the flat
///                          posterior record of the models used
///   horizon_<id>.csv       per-anchor multi-step prediction metrics
/// All floating-point fields use 17 significant digits.
void write_scenario_logs(const ScenarioResult& result, const std::string& dir);

/// Reduced per-step view reconstructed from track_<id>.csv.
struct TrackRow {
  int k = 0;
  double t = 0.0;
  int vertex = 0;
  double x = 0.0, y = 0.0, theta = 0.0, v = 0.0, omega = 0.0;
  double v_cmd = 0.0, omega_cmd = 0.0, v_ref = 0.0, s_ref = 0.0;
  double lag = 0.0, contour = 0.0;
  double z_speed = 0.0, z_turn = 0.0;
  double slack = 0.0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
};

struct StoredRun {
  int run_id = 0;
  std::string condition;
  bool aborted = false;
  std::vector<TrackRow> track;
  std::vector<HorizonMetricsRow> horizon;
};

struct StoredScenario {
  std::string name;
  std::string path_file;
  double spacing = 0.25;
  int laps = 1;
  std::uint64_t seed = 0;
  std::vector<StoredRun> runs;
};

StoredScenario read_scenario_logs(const std::string& dir);

}  // namespace pathlearn
