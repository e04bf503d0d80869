#include "pathlearn/run_io.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using io::format_full;

void write_flat_posterior(std::ostream& out, const wblr::NigPosterior& p) {
  out << ',' << format_full(p.w_mean(0)) << ',' << format_full(p.w_mean(1))
      << ',' << format_full(p.V(0, 0)) << ',' << format_full(p.V(0, 1)) << ','
      << format_full(p.V(1, 0)) << ',' << format_full(p.V(1, 1)) << ','
      << format_full(p.a) << ',' << format_full(p.b);
}

void write_run_log(const RunResult& run, const fs::path& file, double dt) {
  std::ofstream out(file);
  out << "# pathlearn-runlog v1\n";
  out << "vertex_id,t,v,omega,v_cmd,omega_cmd,g_v,g_omega\n";
  // The targets of step k need the state at k+1, so the last executed step
  // has no complete sample.
  for (std::size_t k = 0; k + 1 < run.steps.size(); ++k) {
    const StepRecord& row = run.steps[k];
    const StepRecord& next = run.steps[k + 1];
    const double g_v = (next.measured.v - row.measured.v) / dt;
    const double g_w = (next.measured.omega - row.measured.omega) / dt;
    out << row.vertex << ',' << format_full(row.t) << ','
        << format_full(row.measured.v) << ',' << format_full(row.measured.omega)
        << ',' << format_full(row.applied.v_cmd) << ','
        << format_full(row.applied.omega_cmd) << ',' << format_full(g_v) << ','
        << format_full(g_w) << '\n';
  }
}

void write_track_log(const RunResult& run, const fs::path& file) {
  std::ofstream out(file);
  out << "# pathlearn-track v1\n";
  out << "k,t,vertex,x,y,theta,v,omega,v_cmd,omega_cmd,v_ref,s_ref,lag,"
         "contour,z_v,z_omega,slack,qp_iters,kkt,"
         "mv_w0,mv_w1,mv_V00,mv_V01,mv_V10,mv_V11,mv_a,mv_b,"
         "mw_w0,mw_w1,mw_V00,mw_V01,mw_V10,mw_V11,mw_a,mw_b\n";
  for (const StepRecord& row : run.steps) {
    out << row.k << ',' << format_full(row.t) << ',' << row.vertex << ','
        << format_full(row.measured.x) << ',' << format_full(row.measured.y)
        << ',' << format_full(row.measured.theta) << ','
        << format_full(row.measured.v) << ',' << format_full(row.measured.omega)
        << ',' << format_full(row.applied.v_cmd) << ','
        << format_full(row.applied.omega_cmd) << ',' << format_full(row.v_ref)
        << ',' << format_full(row.s_ref) << ',' << format_full(row.lag) << ','
        << format_full(row.contour) << ',' << format_full(row.z_speed) << ','
        << format_full(row.z_turn) << ',' << format_full(row.slack) << ','
        << row.qp_iterations << ',' << format_full(row.kkt_residual);
    write_flat_posterior(out, row.model.speed);
    write_flat_posterior(out, row.model.turn);
    out << '\n';
  }
}

void write_horizon_log(const RunResult& run, const fs::path& file) {
  std::ofstream out(file);
  out << "# pathlearn-horizon v1\n";
  out << "k,m_rmse_v,m_rmsz_v,m_rmse_omega,m_rmsz_omega\n";
  for (const HorizonMetricsRow& row : run.horizon_rows) {
    out << row.k << ',' << format_full(row.m_rmse_speed) << ','
        << format_full(row.m_rmsz_speed) << ',' << format_full(row.m_rmse_turn)
        << ',' << format_full(row.m_rmsz_turn) << '\n';
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file,
                                               const std::string& magic) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# " + magic, 0) != 0)
    throw std::runtime_error("bad format header in " + file.string());
  std::getline(in, line);  // column names
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
  }
  return rows;
}

}  // namespace

void write_scenario_logs(const ScenarioResult& result, const std::string& dir) {
  const fs::path base(dir);
  fs::create_directories(base);

  ordered_json manifest;
  manifest["format"] = "pathlearn-manifest v1";
  manifest["scenario"] = result.scenario.name;
  manifest["path_file"] = result.scenario.path_file;
  manifest["spacing"] = result.scenario.spacing;
  manifest["laps"] = result.scenario.laps;
  manifest["seed"] = result.scenario.seed;
  manifest["dt"] = result.scenario.stack.controller.dt;
  manifest["desired_speed"] = result.scenario.stack.controller.desired_speed;
  ordered_json runs = ordered_json::array();
  for (const RunResult& run : result.runs) {
    ordered_json r;
    r["run_id"] = run.run_id;
    r["condition"] = run.condition;
    r["aborted"] = run.aborted;
    if (run.aborted) r["abort_reason"] = run.abort_reason;
    runs.push_back(r);
  }
  manifest["runs"] = runs;
  std::ofstream mf(base / "manifest.json");
  mf << manifest.dump(2) << '\n';

  for (const RunResult& run : result.runs) {
    const std::string id = std::to_string(run.run_id);
    write_run_log(run, base / ("run_" + id + ".csv"),
                  result.scenario.stack.controller.dt);
    write_track_log(run, base / ("track_" + id + ".csv"));
    write_horizon_log(run, base / ("horizon_" + id + ".csv"));
  }
}

StoredScenario read_scenario_logs(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream mf(base / "manifest.json");
  if (!mf)
    throw std::runtime_error("no manifest.json in " + dir);
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(mf);
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed manifest.json: " + std::string(e.what()));
  }

  StoredScenario stored;
  stored.name = manifest.value("scenario", std::string("scenario"));
  stored.path_file = manifest.value("path_file", std::string());
  stored.spacing = manifest.value("spacing", 0.25);
  stored.laps = manifest.value("laps", 1);
  stored.seed = manifest.value("seed", std::uint64_t{0});

  for (const auto& r : manifest.at("runs")) {
    StoredRun run;
    run.run_id = r.at("run_id").get<int>();
    run.condition = r.value("condition", std::string());
    run.aborted = r.value("aborted", false);
    const std::string id = std::to_string(run.run_id);

    for (const auto& fields : read_csv(base / ("track_" + id + ".csv"),
                                       "pathlearn-track v1")) {
      if (fields.size() < 19)
        throw std::runtime_error("short track row in " + dir);
      TrackRow row;
      row.k = std::stoi(fields[0]);
      row.t = std::stod(fields[1]);
      row.vertex = std::stoi(fields[2]);
      row.x = std::stod(fields[3]);
      row.y = std::stod(fields[4]);
      row.theta = std::stod(fields[5]);
      row.v = std::stod(fields[6]);
      row.omega = std::stod(fields[7]);
      row.v_cmd = std::stod(fields[8]);
      row.omega_cmd = std::stod(fields[9]);
      row.v_ref = std::stod(fields[10]);
      row.s_ref = std::stod(fields[11]);
      row.lag = std::stod(fields[12]);
      row.contour = std::stod(fields[13]);
      row.z_speed = std::stod(fields[14]);
      row.z_turn = std::stod(fields[15]);
      row.slack = std::stod(fields[16]);
      row.qp_iterations = std::stoi(fields[17]);
      row.kkt_residual = std::stod(fields[18]);
      run.track.push_back(row);
    }
    for (const auto& fields : read_csv(base / ("horizon_" + id + ".csv"),
                                       "pathlearn-horizon v1")) {
      if (fields.size() != 5)
        throw std::runtime_error("short horizon row in " + dir);
      HorizonMetricsRow row;
      row.k = std::stoi(fields[0]);
      row.m_rmse_speed = std::stod(fields[1]);
      row.m_rmsz_speed = std::stod(fields[2]);
      row.m_rmse_turn = std::stod(fields[3]);
      row.m_rmsz_turn = std::stod(fields[4]);
      run.horizon.push_back(row);
    }
    stored.runs.push_back(std::move(run));
  }
  return stored;
}

}  // namespace pathlearn
