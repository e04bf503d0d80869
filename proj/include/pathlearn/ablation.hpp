#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathlearn/sim.hpp"

namespace pathlearn {

inline constexpr const char* kAblationConfigs[4] = {"none", "long_term", "fast",
                                                    "both"};

/// All simulations of the learning ablation: the four learning
/// configurations, each repeated over the seed set.
struct AblationOutcome {
  struct Entry {
    std::string config;
    std::uint64_t seed = 0;
    ScenarioResult result;
  };
  std::vector<Entry> entries;
  int disturbance_vertex = 0;
};

/// Per-configuration aggregates of |contour error|.
struct AblationConfigSummary {
  std::string config;
  double pre_median = 0.0;                  // pooled over runs and seeds
  std::vector<double> post_median_per_run;  // per run, median over seeds
  double exceed_fraction = 0.0;             // steps with |e_c| > e_c_max
};

struct AblationSummary {
  std::vector<AblationConfigSummary> configs;  // exactly 4 rows
  double overall_exceed_fraction = 0.0;
};

/// Runs the base scenario under each of the four learning configurations
/// for every seed. The scenario's own learning flags are ignored.
AblationOutcome run_ablation(const Scenario& base, const Path& path,
                             std::span<const std::uint64_t> seeds);

AblationSummary summarize_ablation(const AblationOutcome& outcome,
                                   double e_c_max);

/// Persists per-entry scenario logs plus ablation.csv (one row per
/// configuration) and ablation_summary.json under `dir`.
void write_ablation_outputs(const AblationOutcome& outcome,
                            const AblationSummary& summary,
                            const std::string& dir);

}  // namespace pathlearn
