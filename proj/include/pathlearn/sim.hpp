#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pathlearn/common.hpp"
#include "pathlearn/config.hpp"
#include "pathlearn/experience.hpp"
#include "pathlearn/mpc.hpp"
#include "pathlearn/path.hpp"

namespace pathlearn {

/// Ground-truth actuator regime of the simulated plant. The turn
/// multiplier scales omega commands inside the plant, invisible to the
/// learner's features.
struct OperatingCondition {
  std::string name = "nominal";
  Eigen::Vector2d true_w_v = Eigen::Vector2d(2.5, -2.5);     // tau_v = 0.4 s
  Eigen::Vector2d true_w_omega = Eigen::Vector2d(10.0 / 3.0, -10.0 / 3.0);
  double turn_multiplier = 1.0;
  double noise_std_v = 0.05;      // m/s^2
  double noise_std_omega = 0.1;   // rad/s^2

  /// Verifies both actuator channels are stable at the step size.
  void validate(double dt) const;

  /// Built-in regimes: "nominal", "loaded" (slower lags),
  /// "loaded_understeer" (x0.7 turn commands), "loaded_oversteer" (x1.2).
  static OperatingCondition preset(const std::string& name);
};

/// Turn-multiplier override active from a vertex onward.
struct DisturbanceEvent {
  int vertex = 0;
  double turn_multiplier = 1.0;
};

struct LearningFlags {
  bool fast = true;
  bool long_term = true;
};

struct LocalizationNoise {
  double pos_std = 0.0;      // m
  double heading_std = 0.0;  // rad
};

/// A fully reproducible experiment: path, per-run operating conditions,
/// disturbance schedule, controller stack, and RNG seed.
struct Scenario {
  std::string name = "scenario";
  std::string path_file;
  double spacing = 0.25;
  int laps = 1;
  int num_runs = 1;
  std::uint64_t seed = 0;
  std::string default_condition = "nominal";
  std::vector<std::string> conditions_per_run;  // optional, size num_runs
  std::vector<DisturbanceEvent> disturbances;
  LearningFlags learning;
  LocalizationNoise localization;
  StackConfig stack;

  /// Parses a "pathlearn-scenario v1" JSON file; the path file is resolved
  /// relative to the scenario file.
  static Scenario load(const std::string& filename);

  OperatingCondition condition_for_run(int run_id) const;
  Path load_path() const;
};

/// One executed control step.
struct StepRecord {
  int k = 0;
  double t = 0.0;
  int vertex = 0;
  FullState measured;
  ControlInput applied;
  double v_ref = 0.0;
  double s_ref = 0.0;
  double lag = 0.0;        // vs the virtual reference
  double contour = 0.0;    // signed lateral offset vs the projected point
  double z_speed = std::numeric_limits<double>::quiet_NaN();
  double z_turn = std::numeric_limits<double>::quiet_NaN();
  double slack = 0.0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  ModelSet model;          // models used by MPC at this step
};

struct HorizonMetricsRow {
  int k = 0;
  double m_rmse_speed = 0.0;
  double m_rmsz_speed = 0.0;
  double m_rmse_turn = 0.0;
  double m_rmsz_turn = 0.0;
};

struct RunResult {
  int run_id = 0;
  std::string condition;
  std::vector<StepRecord> steps;
  std::vector<HorizonMetricsRow> horizon_rows;
  bool aborted = false;
  std::string abort_reason;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<RunResult> runs;
};

/// One plant step: applies the condition (and any active disturbance
/// override) to the turn command, then integrates the true unicycle and
/// first-order actuator dynamics with additive Gaussian acceleration noise.
FullState plant_step(const FullState& state, const ControlInput& u,
                     const OperatingCondition& condition,
                     const std::vector<DisturbanceEvent>& schedule, int vertex,
                     Rng& rng, double dt = 0.1);

/// Executes all runs of a scenario: localize, update experience, fast
/// adaptation, run weighting, model build, MPC solve, plant step. Bit
/// reproducible for a given scenario and seed. When `step_wall_ms` is
/// given, the wall time of each control step (model updates + solve) is
/// appended to it; timing never enters the logs.
ScenarioResult run_scenario(const Scenario& scenario);
ScenarioResult run_scenario(const Scenario& scenario, const Path& path,
                            std::vector<double>* step_wall_ms = nullptr);

}  // namespace pathlearn
