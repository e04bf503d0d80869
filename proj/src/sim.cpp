#include "pathlearn/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "pathlearn/belief.hpp"

namespace pathlearn {

namespace {

using nlohmann::ordered_json;

Eigen::Vector2d lag_params(double tau) {
  return Eigen::Vector2d(1.0 / tau, -1.0 / tau);
}

}  // namespace

void OperatingCondition::validate(double dt) const {
  const double pole_v = 1.0 + dt * true_w_v(1);
  const double pole_w = 1.0 + dt * true_w_omega(1);
  if (std::abs(pole_v) >= 1.0 || std::abs(pole_w) >= 1.0)
    throw std::invalid_argument("operating condition '" + name +
                                "' is unstable at dt");
  if (noise_std_v < 0.0 || noise_std_omega < 0.0)
    throw std::invalid_argument("negative noise std");
}

OperatingCondition OperatingCondition::preset(const std::string& name) {
  OperatingCondition c;
  c.name = name;
  if (name == "nominal") {
    // Defaults: tau_v = 0.4 s, tau_omega = 0.3 s.
  } else if (name == "loaded") {
    c.true_w_v = lag_params(0.6);
    c.true_w_omega = lag_params(0.45);
  } else if (name == "loaded_understeer") {
    c = preset("loaded");
    c.name = name;
    c.turn_multiplier = 0.7;
  } else if (name == "loaded_oversteer") {
    c = preset("loaded");
    c.name = name;
    c.turn_multiplier = 1.2;
  } else {
    throw std::invalid_argument("unknown operating condition: " + name);
  }
  return c;
}

Scenario Scenario::load(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open scenario file: " + filename);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed scenario file " + filename + ": " +
                             e.what());
  }
  if (!j.contains("format") ||
      j.at("format").get<std::string>() != "pathlearn-scenario v1")
    throw std::runtime_error("unsupported scenario format in " + filename);

  Scenario s;
  s.name = j.value("name", std::string("scenario"));
  if (!j.contains("path"))
    throw std::runtime_error("scenario missing 'path': " + filename);
  const std::filesystem::path base =
      std::filesystem::path(filename).parent_path();
  s.path_file = (base / j.at("path").get<std::string>()).string();
  s.spacing = j.value("spacing", 0.25);
  s.laps = j.value("laps", 1);
  s.num_runs = j.value("runs", 1);
  s.seed = j.value("seed", std::uint64_t{0});
  s.default_condition = j.value("condition", std::string("nominal"));
  if (j.contains("conditions_per_run")) {
    s.conditions_per_run =
        j.at("conditions_per_run").get<std::vector<std::string>>();
    if (static_cast<int>(s.conditions_per_run.size()) != s.num_runs)
      throw std::runtime_error("conditions_per_run size mismatch");
  }
  if (j.contains("disturbances")) {
    for (const auto& ev : j.at("disturbances")) {
      s.disturbances.push_back(DisturbanceEvent{
          ev.at("vertex").get<int>(), ev.at("turn_multiplier").get<double>()});
    }
    std::sort(s.disturbances.begin(), s.disturbances.end(),
              [](const auto& a, const auto& b) { return a.vertex < b.vertex; });
  }
  if (j.contains("learning")) {
    s.learning.fast = j.at("learning").value("fast", true);
    s.learning.long_term = j.at("learning").value("long_term", true);
  }
  if (j.contains("localization_noise")) {
    s.localization.pos_std = j.at("localization_noise").value("pos_std", 0.0);
    s.localization.heading_std =
        j.at("localization_noise").value("heading_std", 0.0);
  }
  s.stack.controller.desired_speed = j.value("desired_speed", 2.0);
  if (j.contains("controller"))
    apply_config_json(s.stack, j.at("controller").dump());
  return s;
}

OperatingCondition Scenario::condition_for_run(int run_id) const {
  std::string name = default_condition;
  if (!conditions_per_run.empty()) {
    const int index = run_id - 1;
    if (index < 0 || index >= static_cast<int>(conditions_per_run.size()))
      throw std::out_of_range("run id outside conditions_per_run");
    name = conditions_per_run[static_cast<std::size_t>(index)];
  }
  return OperatingCondition::preset(name);
}

Path Scenario::load_path() const {
  return Path::load(path_file, spacing, laps);
}

FullState plant_step(const FullState& state, const ControlInput& u,
                     const OperatingCondition& condition,
                     const std::vector<DisturbanceEvent>& schedule, int vertex,
                     Rng& rng, double dt) {
  double multiplier = condition.turn_multiplier;
  for (const DisturbanceEvent& ev : schedule) {
    if (vertex >= ev.vertex) multiplier = ev.turn_multiplier;
  }
  FullState next;
  next.x = state.x + dt * state.v * std::cos(state.theta);
  next.y = state.y + dt * state.v * std::sin(state.theta);
  next.theta = wrap_angle(state.theta + dt * state.omega);
  const double eta_v = rng.normal(0.0, condition.noise_std_v);
  const double eta_w = rng.normal(0.0, condition.noise_std_omega);
  next.v = state.v + dt * (condition.true_w_v(0) * u.v_cmd +
                           condition.true_w_v(1) * state.v + eta_v);
  next.omega = state.omega +
               dt * (condition.true_w_omega(0) * multiplier * u.omega_cmd +
                     condition.true_w_omega(1) * state.omega + eta_w);
  return next;
}

namespace {

struct LiveSample {
  int vertex;
  ExperienceSample sample;
};

FullState localize(const FullState& truth, const LocalizationNoise& noise,
                   Rng& rng) {
  if (noise.pos_std == 0.0 && noise.heading_std == 0.0) return truth;
  FullState z = truth;
  z.x += rng.normal(0.0, noise.pos_std);
  z.y += rng.normal(0.0, noise.pos_std);
  z.theta = wrap_angle(z.theta + rng.normal(0.0, noise.heading_std));
  return z;
}

std::vector<HorizonMetricsRow> horizon_metrics(
    const std::vector<StepRecord>& steps, const ControllerConfig& cc) {
  std::vector<HorizonMetricsRow> rows;
  const int H = cc.horizon;
  const int total = static_cast<int>(steps.size());
  for (int k = 0; k + H < total; ++k) {
    Belief b{steps[static_cast<std::size_t>(k)].measured,
             Eigen::Matrix<double, 5, 5>::Zero()};
    const ModelSet& model = steps[static_cast<std::size_t>(k)].model;
    const ActuatorParams params = model.params();
    const ParamCov pcov = model.param_cov();
    const ProcessNoise noise = model.noise();
    // Open loop: these are predictions under the actually-applied inputs.
    const PropagateOptions opts{AncillaryGains{0.0, 0.0}, false};

    HorizonMetricsRow row;
    row.k = k;
    double se_v = 0.0, sz_v = 0.0, se_w = 0.0, sz_w = 0.0;
    for (int q = 0; q < H; ++q) {
      const StepRecord& at = steps[static_cast<std::size_t>(k + q)];
      b = propagate(b, at.applied, params, pcov, noise, cc.dt, opts);
      const StepRecord& realized = steps[static_cast<std::size_t>(k + q + 1)];
      const double err_v = realized.measured.v - b.mean.v;
      const double err_w = realized.measured.omega - b.mean.omega;
      const double std_v = std::sqrt(b.cov(3, 3));
      const double std_w = std::sqrt(b.cov(4, 4));
      if (std_v <= 0.0 || std_w <= 0.0)
        throw std::runtime_error("horizon prediction std vanished");
      se_v += err_v * err_v;
      sz_v += (err_v / std_v) * (err_v / std_v);
      se_w += err_w * err_w;
      sz_w += (err_w / std_w) * (err_w / std_w);
    }
    row.m_rmse_speed = std::sqrt(se_v / H);
    row.m_rmsz_speed = std::sqrt(sz_v / H);
    row.m_rmse_turn = std::sqrt(se_w / H);
    row.m_rmsz_turn = std::sqrt(sz_w / H);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario) {
  return run_scenario(scenario, scenario.load_path());
}

ScenarioResult run_scenario(const Scenario& scenario, const Path& path,
                            std::vector<double>* step_wall_ms) {
  const ControllerConfig& cc = scenario.stack.controller;
  const LearningConfig& lc = scenario.stack.learning;
  const double dt = cc.dt;
  const double v_des = cc.desired_speed;

  ScenarioResult result;
  result.scenario = scenario;

  ExperienceStore store(path.size());
  Rng rng(scenario.seed);

  const wblr::NigPosterior base_speed = lc.base_prior();
  const wblr::NigPosterior base_turn = lc.base_prior();

  const int upcoming_span =
      static_cast<int>(std::ceil(cc.horizon * dt * v_des / path.spacing())) + 1;
  const int max_steps =
      static_cast<int>(std::ceil(5.0 * path.length() / (v_des * dt)));

  for (int run_id = 1; run_id <= scenario.num_runs; ++run_id) {
    const OperatingCondition condition = scenario.condition_for_run(run_id);
    condition.validate(dt);

    RunResult run;
    run.run_id = run_id;
    run.condition = condition.name;

    MpcController controller(path, cc);
    wblr::NigPosterior fast_speed = base_speed;
    wblr::NigPosterior fast_turn = base_turn;
    std::deque<LiveSample> recent;

    FullState truth;
    truth.x = path.vertex(0).position.x();
    truth.y = path.vertex(0).position.y();
    truth.theta = path.vertex(0).heading;

    double s_proj = 0.0;
    std::optional<StepRecord> previous;
    FullState previous_measured;

    for (int k = 0; k < max_steps; ++k) {
      const FullState measured = localize(truth, scenario.localization, rng);
      const auto step_start = std::chrono::steady_clock::now();
      s_proj = path.project(Eigen::Vector2d(measured.x, measured.y), s_proj,
                            2.0, 5.0 + v_des);
      const int vertex = std::clamp(
          static_cast<int>(std::lround(s_proj / path.spacing())), 0,
          path.size() - 1);

      if (previous.has_value()) {
        const auto [speed_sample, turn_sample] = feature_and_target(
            previous_measured.v, previous_measured.omega, previous->applied,
            measured.v, measured.omega, dt);
        ExperienceSample sample{speed_sample, turn_sample, previous->t};
        store.record(run_id, previous->vertex, sample);
        recent.push_back(LiveSample{previous->vertex, sample});
        while (static_cast<int>(recent.size()) > lc.recent_samples)
          recent.pop_front();

        StepRecord& prev_row = run.steps.back();
        const wblr::Prediction pv =
            wblr::predict(prev_row.model.speed, speed_sample.x);
        const wblr::Prediction pw =
            wblr::predict(prev_row.model.turn, turn_sample.x);
        prev_row.z_speed = (speed_sample.g - pv.mean) / std::sqrt(pv.variance);
        prev_row.z_turn = (turn_sample.g - pw.mean) / std::sqrt(pw.variance);

        if (scenario.learning.fast) {
          fast_speed = wblr::recursive_step(
              fast_speed, wblr::WeightedSample{speed_sample.x, speed_sample.g, 1.0},
              lc.n0);
          fast_turn = wblr::recursive_step(
              fast_turn, wblr::WeightedSample{turn_sample.x, turn_sample.g, 1.0},
              lc.n0);
        }
      }

      if (vertex >= path.size() - 1) break;

      ModelSet models{fast_speed, fast_turn};
      if (scenario.learning.long_term && !recent.empty()) {
        std::set<int> recent_vertex_set;
        std::vector<ExperienceSample> recent_samples;
        recent_samples.reserve(recent.size());
        for (const LiveSample& ls : recent) {
          recent_vertex_set.insert(ls.vertex);
          recent_samples.push_back(ls.sample);
        }
        const std::vector<int> recent_vertices(recent_vertex_set.begin(),
                                               recent_vertex_set.end());
        auto assessments = fit_recent_models(store, run_id, recent_vertices,
                                             base_speed, base_turn);
        if (!assessments.empty()) {
          outlier_reject(assessments, recent_samples, lc.outlier);
          run_weights(assessments, recent_samples, models.speed, models.turn,
                      lc.family());
          std::vector<int> upcoming;
          for (int v = vertex; v <= std::min(vertex + upcoming_span,
                                             path.size() - 1); ++v)
            upcoming.push_back(v);
          auto [pred_speed, pred_turn] = build_predictive_model(
              models.speed, models.turn, store, upcoming, assessments);
          models.speed = std::move(pred_speed);
          models.turn = std::move(pred_turn);
        }
      }

      Belief belief;
      belief.mean = measured;
      belief.cov.setZero();
      belief.cov(0, 0) = scenario.localization.pos_std * scenario.localization.pos_std;
      belief.cov(1, 1) = belief.cov(0, 0);
      belief.cov(2, 2) =
          scenario.localization.heading_std * scenario.localization.heading_std;

      HorizonSolution solution;
      try {
        solution = controller.solve(belief, models);
      } catch (const std::exception& e) {
        run.aborted = true;
        run.abort_reason = e.what();
        break;
      }
      const ControlInput u = solution.first_input();

      if (step_wall_ms) {
        const std::chrono::duration<double, std::milli> elapsed =
            std::chrono::steady_clock::now() - step_start;
        step_wall_ms->push_back(elapsed.count());
      }

      StepRecord row;
      row.k = k;
      row.t = k * dt;
      row.vertex = vertex;
      row.measured = measured;
      row.applied = u;
      row.v_ref = solution.v_ref.front();
      row.s_ref = solution.s_ref.front();
      const PathPoint proj = path.at(s_proj);
      row.contour =
          proj.normal.dot(Eigen::Vector2d(measured.x, measured.y) - proj.position);
      row.lag = proj.tangent.dot(Eigen::Vector2d(measured.x, measured.y) -
                                 proj.position);
      row.slack = solution.diagnostics.max_slack;
      row.qp_iterations = solution.diagnostics.qp_iterations;
      row.kkt_residual = solution.diagnostics.kkt_residual;
      row.model = models;
      run.steps.push_back(row);

      previous = row;
      previous_measured = measured;
      truth = plant_step(truth, u, condition, scenario.disturbances, vertex,
                         rng, dt);
    }

    run.horizon_rows = horizon_metrics(run.steps, cc);
    result.runs.push_back(std::move(run));
  }
  return result;
}

}  // namespace pathlearn
