#include "pathlearn/ablation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>

#include "pathlearn/common.hpp"
#include "pathlearn/metrics.hpp"
#include "pathlearn/run_io.hpp"

namespace pathlearn {

namespace {

using io::format_full;
using nlohmann::ordered_json;

LearningFlags flags_for(const std::string& config) {
  if (config == "none") return LearningFlags{false, false};
  if (config == "long_term") return LearningFlags{false, true};
  if (config == "fast") return LearningFlags{true, false};
  if (config == "both") return LearningFlags{true, true};
  throw std::invalid_argument("unknown ablation config: " + config);
}

}  // namespace

AblationOutcome run_ablation(const Scenario& base, const Path& path,
                             std::span<const std::uint64_t> seeds) {
  AblationOutcome outcome;
  outcome.disturbance_vertex =
      base.disturbances.empty() ? path.size() : base.disturbances.front().vertex;
  for (const char* config : kAblationConfigs) {
    for (const std::uint64_t seed : seeds) {
      Scenario scenario = base;
      scenario.learning = flags_for(config);
      scenario.seed = seed;
      scenario.name = base.name + "_" + config + "_seed" + std::to_string(seed);
      AblationOutcome::Entry entry;
      entry.config = config;
      entry.seed = seed;
      entry.result = run_scenario(scenario, path);
      outcome.entries.push_back(std::move(entry));
    }
  }
  return outcome;
}

AblationSummary summarize_ablation(const AblationOutcome& outcome,
                                   double e_c_max) {
  AblationSummary summary;
  long total_steps = 0;
  long total_exceed = 0;

  for (const char* config : kAblationConfigs) {
    AblationConfigSummary cs;
    cs.config = config;

    std::vector<double> pre_pooled;
    // run id -> per-seed post medians
    std::map<int, std::vector<double>> post_by_run;
    long steps = 0, exceed = 0;

    for (const AblationOutcome::Entry& entry : outcome.entries) {
      if (entry.config != config) continue;
      for (const RunResult& run : entry.result.runs) {
        std::vector<double> post;
        for (const StepRecord& step : run.steps) {
          const double err = std::abs(step.contour);
          ++steps;
          if (err > e_c_max) ++exceed;
          if (step.vertex < outcome.disturbance_vertex)
            pre_pooled.push_back(err);
          else
            post.push_back(err);
        }
        if (!post.empty())
          post_by_run[run.run_id].push_back(stats::median(std::move(post)));
      }
    }

    cs.pre_median = pre_pooled.empty() ? 0.0 : stats::median(pre_pooled);
    if (!post_by_run.empty()) {
      const int max_run = post_by_run.rbegin()->first;
      cs.post_median_per_run.assign(static_cast<std::size_t>(max_run), 0.0);
      for (auto& [run_id, medians] : post_by_run)
        cs.post_median_per_run[static_cast<std::size_t>(run_id - 1)] =
            stats::median(std::move(medians));
    }
    cs.exceed_fraction =
        steps > 0 ? static_cast<double>(exceed) / static_cast<double>(steps) : 0.0;
    total_steps += steps;
    total_exceed += exceed;
    summary.configs.push_back(std::move(cs));
  }
  summary.overall_exceed_fraction =
      total_steps > 0
          ? static_cast<double>(total_exceed) / static_cast<double>(total_steps)
          : 0.0;
  return summary;
}

void write_ablation_outputs(const AblationOutcome& outcome,
                            const AblationSummary& summary,
                            const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  fs::create_directories(base);

  for (const AblationOutcome::Entry& entry : outcome.entries) {
    const fs::path sub = base / entry.result.scenario.name;
    write_scenario_logs(entry.result, sub.string());
    metrics::write_metric_outputs(read_scenario_logs(sub.string()),
                                  sub.string());
  }

  std::ofstream csv(base / "ablation.csv");
  csv << "# pathlearn-ablation v1\n";
  csv << "config,pre_median";
  std::size_t run_count = 0;
  for (const AblationConfigSummary& cs : summary.configs)
    run_count = std::max(run_count, cs.post_median_per_run.size());
  for (std::size_t r = 1; r <= run_count; ++r) csv << ",post_median_run" << r;
  csv << ",exceed_fraction\n";
  for (const AblationConfigSummary& cs : summary.configs) {
    csv << cs.config << ',' << format_full(cs.pre_median);
    for (std::size_t r = 0; r < run_count; ++r) {
      const double value =
          r < cs.post_median_per_run.size() ? cs.post_median_per_run[r] : 0.0;
      csv << ',' << format_full(value);
    }
    csv << ',' << format_full(cs.exceed_fraction) << '\n';
  }
  csv.close();

  ordered_json j;
  j["format"] = "pathlearn-ablation-summary v1";
  j["disturbance_vertex"] = outcome.disturbance_vertex;
  j["overall_exceed_fraction"] = summary.overall_exceed_fraction;
  ordered_json configs = ordered_json::array();
  for (const AblationConfigSummary& cs : summary.configs) {
    ordered_json c;
    c["config"] = cs.config;
    c["pre_median"] = cs.pre_median;
    c["post_median_per_run"] = cs.post_median_per_run;
    c["exceed_fraction"] = cs.exceed_fraction;
    configs.push_back(c);
  }
  j["configs"] = configs;
  std::ofstream js(base / "ablation_summary.json");
  js << j.dump(2) << '\n';
}

}  // namespace pathlearn
