#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathlearn/run_io.hpp"

namespace pathlearn {
namespace metrics {

/// Multi-step predictions for one anchor step: means, stds and realized
/// values at k+1 .. k+H under the actually-applied inputs.
struct HorizonRecord {
  int k = 0;
  std::vector<double> pred_mean;
  std::vector<double> pred_std;
  std::vector<double> realized;
};

/// Root-mean-square of (realized - predicted mean) over the horizon.
double m_rmse(std::span<const double> pred_mean,
              std::span<const double> realized);
double m_rmse(const HorizonRecord& record);

/// Root-mean-square Z-score over the horizon; throws if any std is <= 0.
/// Values above 2.0 flag an overconfident uncertainty estimate.
double m_rmsz(std::span<const double> pred_mean, std::span<const double> pred_std,
              std::span<const double> realized);
double m_rmsz(const HorizonRecord& record);

constexpr double kOverconfidentRmsz = 2.0;
/// Acceptability band for M-RMSZ, applied as [0, 1.5].
constexpr double kAcceptableRmszUpper = 1.5;

/// Per-vertex 25/50/75 percentiles of |contour error| across runs. Each
/// run contributes one value per vertex (the mean absolute contour error
/// of its steps there). Vertices never visited are skipped.
struct VertexPercentiles {
  int vertex = 0;
  int run_count = 0;
  std::array<double, 3> p25_50_75{};
};
std::vector<VertexPercentiles> lateral_percentiles(
    const std::vector<StoredRun>& runs);

struct MetricTableRow {
  int run_id = 0;
  std::string condition;
  std::array<double, 3> m_rmse_turn_p25_50_75{};
  std::array<double, 3> m_rmsz_turn_p25_50_75{};
  double lateral_rms = 0.0;
  double lateral_max = 0.0;
};

std::vector<MetricTableRow> metric_table(const StoredScenario& stored);

/// Writes metrics.csv and summary.json into `dir` from the persisted logs
/// there; running it twice (or after `simulate`) is byte-identical.
void write_metric_outputs(const StoredScenario& stored, const std::string& dir);

}  // namespace metrics
}  // namespace pathlearn
