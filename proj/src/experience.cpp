#include "pathlearn/experience.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathlearn/common.hpp"

namespace pathlearn {

void ExperienceStore::record(int run_id, int vertex_id,
                             const ExperienceSample& sample) {
  if (vertex_id < 0 || vertex_id >= vertex_count_)
    throw std::invalid_argument("record: unknown path vertex");
  const bool finite = sample.speed.x.allFinite() && sample.turn.x.allFinite() &&
                      std::isfinite(sample.speed.g) &&
                      std::isfinite(sample.turn.g) && std::isfinite(sample.t);
  if (!finite) throw std::invalid_argument("record: non-finite sample");
  runs_[run_id][vertex_id].push_back(sample);
}

std::vector<int> ExperienceStore::run_ids() const {
  std::vector<int> ids;
  ids.reserve(runs_.size());
  for (const auto& [id, _] : runs_) ids.push_back(id);
  return ids;
}

const std::vector<ExperienceSample>* ExperienceStore::samples_at(
    int run_id, int vertex_id) const {
  const auto run = runs_.find(run_id);
  if (run == runs_.end()) return nullptr;
  const auto vertex = run->second.find(vertex_id);
  if (vertex == run->second.end()) return nullptr;
  return &vertex->second;
}

int ExperienceStore::sample_count(int run_id) const {
  const auto run = runs_.find(run_id);
  if (run == runs_.end()) return 0;
  int n = 0;
  for (const auto& [_, samples] : run->second) n += static_cast<int>(samples.size());
  return n;
}

std::vector<ExperienceSample> ExperienceStore::gather(
    int run_id, std::span<const int> vertex_ids) const {
  std::vector<ExperienceSample> out;
  for (int vertex : vertex_ids) {
    if (const auto* samples = samples_at(run_id, vertex))
      out.insert(out.end(), samples->begin(), samples->end());
  }
  return out;
}

namespace {

std::vector<wblr::WeightedSample> channel_batch(
    std::span<const ExperienceSample> samples, bool speed, double weight) {
  std::vector<wblr::WeightedSample> batch;
  batch.reserve(samples.size());
  for (const ExperienceSample& s : samples) {
    const ChannelSample& ch = speed ? s.speed : s.turn;
    batch.push_back(wblr::WeightedSample{ch.x, ch.g, weight});
  }
  return batch;
}

double recent_log_likelihood(const wblr::NigPosterior& model_speed,
                             const wblr::NigPosterior& model_turn,
                             std::span<const ExperienceSample> recent,
                             wblr::PredictiveFamily family) {
  double ll = 0.0;
  for (const ExperienceSample& s : recent) {
    ll += wblr::log_predictive_density(model_speed, s.speed.x, s.speed.g, family);
    ll += wblr::log_predictive_density(model_turn, s.turn.x, s.turn.g, family);
  }
  return ll;
}

}  // namespace

std::vector<RunAssessment> fit_recent_models(
    const ExperienceStore& store, int current_run,
    std::span<const int> recent_vertex_ids,
    const wblr::NigPosterior& base_prior_speed,
    const wblr::NigPosterior& base_prior_turn) {
  std::vector<RunAssessment> out;
  for (int run : store.run_ids()) {
    if (run == current_run) continue;
    const auto section = store.gather(run, recent_vertex_ids);
    if (section.empty()) continue;
    RunAssessment a;
    a.run_id = run;
    const auto speed_batch = channel_batch(section, true, 1.0);
    const auto turn_batch = channel_batch(section, false, 1.0);
    a.model_speed = wblr::nig_update(base_prior_speed, speed_batch);
    a.model_turn = wblr::nig_update(base_prior_turn, turn_batch);
    out.push_back(std::move(a));
  }
  return out;
}

bool outlier_accept_channel(const wblr::NigPosterior& model,
                            std::span<const ChannelSample> recent,
                            const OutlierConfig& cfg) {
  if (recent.empty())
    throw std::invalid_argument("outlier gate needs at least one sample");
  int exceedances = 0;
  for (const ChannelSample& s : recent) {
    const wblr::Prediction pred = wblr::predict(model, s.x);
    const double std = std::sqrt(pred.variance);
    const double z = (s.g - pred.mean) / std;
    if (!std::isfinite(z) || std::abs(z) > cfg.z_threshold) ++exceedances;
  }
  const double tail = stats::binomial_tail_geq(
      exceedances, static_cast<int>(recent.size()), cfg.exceed_prob);
  return tail >= cfg.alpha;
}

void outlier_reject(std::vector<RunAssessment>& assessments,
                    std::span<const ExperienceSample> recent,
                    const OutlierConfig& cfg) {
  std::vector<ChannelSample> speed, turn;
  speed.reserve(recent.size());
  turn.reserve(recent.size());
  for (const ExperienceSample& s : recent) {
    speed.push_back(s.speed);
    turn.push_back(s.turn);
  }
  for (RunAssessment& a : assessments) {
    a.accepted = outlier_accept_channel(a.model_speed, speed, cfg) &&
                 outlier_accept_channel(a.model_turn, turn, cfg);
    if (!a.accepted) a.weight = 0.0;
  }
}

void run_weights(std::vector<RunAssessment>& assessments,
                 std::span<const ExperienceSample> recent,
                 const wblr::NigPosterior& prior_speed,
                 const wblr::NigPosterior& prior_turn,
                 wblr::PredictiveFamily family) {
  const double prior_ll =
      recent_log_likelihood(prior_speed, prior_turn, recent, family);

  double best_ll = -std::numeric_limits<double>::infinity();
  int best_run = -1;
  for (RunAssessment& a : assessments) {
    a.log_likelihood =
        recent_log_likelihood(a.model_speed, a.model_turn, recent, family);
    if (a.accepted && a.log_likelihood < prior_ll) {
      // Less probable than using no extra experience at all.
      a.accepted = false;
      a.weight = 0.0;
    }
    const bool better = a.log_likelihood > best_ll ||
                        (a.log_likelihood == best_ll && a.run_id < best_run);
    if (a.accepted && better) {
      best_ll = a.log_likelihood;
      best_run = a.run_id;
    }
  }
  for (RunAssessment& a : assessments) {
    if (!a.accepted) {
      a.weight = 0.0;
      continue;
    }
    a.weight = a.run_id == best_run ? 1.0 : std::exp(a.log_likelihood - best_ll);
  }
}

std::pair<wblr::NigPosterior, wblr::NigPosterior> build_predictive_model(
    const wblr::NigPosterior& fast_speed, const wblr::NigPosterior& fast_turn,
    const ExperienceStore& store, std::span<const int> upcoming_vertex_ids,
    std::span<const RunAssessment> assessments) {
  std::vector<wblr::WeightedSample> speed_batch, turn_batch;
  for (const RunAssessment& a : assessments) {
    if (!a.accepted || a.weight <= 0.0) continue;
    const auto section = store.gather(a.run_id, upcoming_vertex_ids);
    const auto speed = channel_batch(section, true, a.weight);
    const auto turn = channel_batch(section, false, a.weight);
    speed_batch.insert(speed_batch.end(), speed.begin(), speed.end());
    turn_batch.insert(turn_batch.end(), turn.begin(), turn.end());
  }
  if (speed_batch.empty()) return {fast_speed, fast_turn};
  return {wblr::nig_update(fast_speed, speed_batch),
          wblr::nig_update(fast_turn, turn_batch)};
}

}  // namespace pathlearn
