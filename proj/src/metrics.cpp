#include "pathlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn {
namespace metrics {

namespace {
using io::format_full;
using nlohmann::ordered_json;
}  // namespace

double m_rmse(std::span<const double> pred_mean,
              std::span<const double> realized) {
  if (pred_mean.empty() || pred_mean.size() != realized.size())
    throw std::invalid_argument("m_rmse: inconsistent horizon");
  double sum = 0.0;
  for (std::size_t q = 0; q < pred_mean.size(); ++q) {
    const double err = realized[q] - pred_mean[q];
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(pred_mean.size()));
}

double m_rmse(const HorizonRecord& record) {
  return m_rmse(record.pred_mean, record.realized);
}

double m_rmsz(std::span<const double> pred_mean, std::span<const double> pred_std,
              std::span<const double> realized) {
  if (pred_mean.empty() || pred_mean.size() != realized.size() ||
      pred_mean.size() != pred_std.size())
    throw std::invalid_argument("m_rmsz: inconsistent horizon");
  double sum = 0.0;
  for (std::size_t q = 0; q < pred_mean.size(); ++q) {
    if (!(pred_std[q] > 0.0))
      throw std::invalid_argument("m_rmsz: nonpositive predictive std");
    const double z = (realized[q] - pred_mean[q]) / pred_std[q];
    sum += z * z;
  }
  return std::sqrt(sum / static_cast<double>(pred_mean.size()));
}

double m_rmsz(const HorizonRecord& record) {
  return m_rmsz(record.pred_mean, record.pred_std, record.realized);
}

std::vector<VertexPercentiles> lateral_percentiles(
    const std::vector<StoredRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs");
  // vertex -> per-run mean |contour|.
  std::map<int, std::vector<double>> per_vertex;
  for (const StoredRun& run : runs) {
    std::map<int, std::pair<double, int>> sums;
    for (const TrackRow& row : run.track) {
      auto& [sum, count] = sums[row.vertex];
      sum += std::abs(row.contour);
      count += 1;
    }
    for (const auto& [vertex, entry] : sums)
      per_vertex[vertex].push_back(entry.first / entry.second);
  }
  std::vector<VertexPercentiles> out;
  out.reserve(per_vertex.size());
  for (auto& [vertex, values] : per_vertex) {
    std::sort(values.begin(), values.end());
    VertexPercentiles vp;
    vp.vertex = vertex;
    vp.run_count = static_cast<int>(values.size());
    vp.p25_50_75 = {stats::percentile_sorted(values, 0.25),
                    stats::percentile_sorted(values, 0.50),
                    stats::percentile_sorted(values, 0.75)};
    out.push_back(vp);
  }
  return out;
}

std::vector<MetricTableRow> metric_table(const StoredScenario& stored) {
  std::vector<MetricTableRow> rows;
  for (const StoredRun& run : stored.runs) {
    MetricTableRow row;
    row.run_id = run.run_id;
    row.condition = run.condition;
    if (!run.horizon.empty()) {
      std::vector<double> rmse, rmsz;
      rmse.reserve(run.horizon.size());
      rmsz.reserve(run.horizon.size());
      for (const HorizonMetricsRow& h : run.horizon) {
        rmse.push_back(h.m_rmse_turn);
        rmsz.push_back(h.m_rmsz_turn);
      }
      std::sort(rmse.begin(), rmse.end());
      std::sort(rmsz.begin(), rmsz.end());
      row.m_rmse_turn_p25_50_75 = {stats::percentile_sorted(rmse, 0.25),
                                   stats::percentile_sorted(rmse, 0.50),
                                   stats::percentile_sorted(rmse, 0.75)};
      row.m_rmsz_turn_p25_50_75 = {stats::percentile_sorted(rmsz, 0.25),
                                   stats::percentile_sorted(rmsz, 0.50),
                                   stats::percentile_sorted(rmsz, 0.75)};
    }
    double sum_sq = 0.0;
    double max_abs = 0.0;
    for (const TrackRow& t : run.track) {
      sum_sq += t.contour * t.contour;
      max_abs = std::max(max_abs, std::abs(t.contour));
    }
    row.lateral_rms =
        run.track.empty() ? 0.0 : std::sqrt(sum_sq / run.track.size());
    row.lateral_max = max_abs;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_metric_outputs(const StoredScenario& stored, const std::string& dir) {
  const auto rows = metric_table(stored);
  const std::filesystem::path base(dir);

  std::ofstream csv(base / "metrics.csv");
  csv << "# pathlearn-metrics v1\n";
  csv << "run_id,condition,m_rmse_omega_p25,m_rmse_omega_p50,m_rmse_omega_p75,"
         "m_rmsz_omega_p25,m_rmsz_omega_p50,m_rmsz_omega_p75,"
         "lateral_rms,lateral_max\n";
  for (const MetricTableRow& row : rows) {
    csv << row.run_id << ',' << row.condition;
    for (double v : row.m_rmse_turn_p25_50_75) csv << ',' << format_full(v);
    for (double v : row.m_rmsz_turn_p25_50_75) csv << ',' << format_full(v);
    csv << ',' << format_full(row.lateral_rms) << ','
        << format_full(row.lateral_max) << '\n';
  }
  csv.close();

  ordered_json summary;
  summary["format"] = "pathlearn-summary v1";
  summary["scenario"] = stored.name;
  summary["seed"] = stored.seed;
  ordered_json jruns = ordered_json::array();
  for (const MetricTableRow& row : rows) {
    ordered_json r;
    r["run_id"] = row.run_id;
    r["condition"] = row.condition;
    r["m_rmse_omega"] = {{"p25", row.m_rmse_turn_p25_50_75[0]},
                         {"p50", row.m_rmse_turn_p25_50_75[1]},
                         {"p75", row.m_rmse_turn_p25_50_75[2]}};
    r["m_rmsz_omega"] = {{"p25", row.m_rmsz_turn_p25_50_75[0]},
                         {"p50", row.m_rmsz_turn_p25_50_75[1]},
                         {"p75", row.m_rmsz_turn_p25_50_75[2]}};
    r["lateral_rms"] = row.lateral_rms;
    r["lateral_max"] = row.lateral_max;
    jruns.push_back(r);
  }
  summary["runs"] = jruns;

  const auto profile = lateral_percentiles(stored.runs);
  std::ofstream prof(base / "lateral_profile.csv");
  prof << "# pathlearn-lateral-profile v1\n";
  prof << "vertex,runs,p25,p50,p75\n";
  for (const VertexPercentiles& vp : profile) {
    prof << vp.vertex << ',' << vp.run_count << ','
         << format_full(vp.p25_50_75[0]) << ',' << format_full(vp.p25_50_75[1])
         << ',' << format_full(vp.p25_50_75[2]) << '\n';
  }
  prof.close();

  std::ofstream js(base / "summary.json");
  js << summary.dump(2) << '\n';
}

}  // namespace metrics
}  // namespace pathlearn
