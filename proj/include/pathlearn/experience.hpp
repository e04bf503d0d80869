#pragma once

#include <map>
#include <span>
#include <vector>

#include "pathlearn/vehicle_model.hpp"
#include "pathlearn/wblr.hpp"

namespace pathlearn {

/// One recorded step: features and targets for both actuator channels plus
/// the simulation time at which the command was applied.
struct ExperienceSample {
  ChannelSample speed;
  ChannelSample turn;
  double t = 0.0;
};

/// Samples indexed by run and path vertex. Append-only; a single writer
/// (the live run) may interleave with concurrent readers as long as
/// readers hold a snapshot taken between control steps.
class ExperienceStore {
 public:
  explicit ExperienceStore(int vertex_count) : vertex_count_(vertex_count) {}

  int vertex_count() const { return vertex_count_; }

  /// Appends a sample. Throws on an unknown vertex or non-finite data.
  void record(int run_id, int vertex_id, const ExperienceSample& sample);

  std::vector<int> run_ids() const;
  const std::vector<ExperienceSample>* samples_at(int run_id, int vertex_id) const;
  int sample_count(int run_id) const;

  /// All samples of one run over a vertex set, in vertex order.
  std::vector<ExperienceSample> gather(int run_id,
                                       std::span<const int> vertex_ids) const;

 private:
  int vertex_count_;
  std::map<int, std::map<int, std::vector<ExperienceSample>>> runs_;
};

/// Assessment of one previous run against recent live data.
struct RunAssessment {
  int run_id = 0;
  wblr::NigPosterior model_speed;
  wblr::NigPosterior model_turn;
  double log_likelihood = 0.0;  // of the recent live data under the models
  bool accepted = false;
  double weight = 0.0;          // 1 for the accepted maximum, else ratio
};

/// Section sizes of the data-management scheme: the recent window is a
/// sample count (30 samples = 3 s at 10 Hz), the upcoming window a vertex
/// span matched to the MPC look-ahead.
struct SectionWindows {
  int recent_sample_count = 30;
  int upcoming_vertex_span = 25;
};

/// Rejection settings for the run-similarity gate. `exceed_prob` is the
/// probability that a calibrated |Z| exceeds `z_threshold` (the 0.05 band
/// paired with a threshold of 2; gaussian_two_sided_exceedance gives the
/// exact 0.0455 variant).
struct OutlierConfig {
  double z_threshold = 2.0;
  double exceed_prob = 0.05;
  double alpha = 0.05;
};

/// Fits one model per previous run from that run's samples over the recent
/// section (unit weights, starting at the shared base prior). Runs without
/// samples there are skipped; weights and accept flags are left unset.
std::vector<RunAssessment> fit_recent_models(
    const ExperienceStore& store, int current_run,
    std::span<const int> recent_vertex_ids,
    const wblr::NigPosterior& base_prior_speed,
    const wblr::NigPosterior& base_prior_turn);

/// Z-score gate for one channel: counts recent predictions with
/// |Z| > z_threshold and accepts unless that count is binomially
/// improbable (one-sided tail below alpha). A zero or non-finite
/// predictive std counts as an exceedance.
bool outlier_accept_channel(const wblr::NigPosterior& model,
                            std::span<const ChannelSample> recent,
                            const OutlierConfig& cfg);

/// Applies the channel gate to both channels of every assessment; a run is
/// accepted only if both channels pass. Requires at least one recent sample.
void outlier_reject(std::vector<RunAssessment>& assessments,
                    std::span<const ExperienceSample> recent,
                    const OutlierConfig& cfg);

/// Scores each surviving run by the log predictive density of the recent
/// live data (sum over points and channels, equal model priors), drops runs
/// scoring below the prior model, and assigns weights
/// exp(LL_j - LL_{j*}) with the maximum (lowest run id on ties) at 1.
void run_weights(std::vector<RunAssessment>& assessments,
                 std::span<const ExperienceSample> recent,
                 const wblr::NigPosterior& prior_speed,
                 const wblr::NigPosterior& prior_turn,
                 wblr::PredictiveFamily family = wblr::PredictiveFamily::kStudentT);

/// Folds upcoming-section data of accepted runs, each point carrying its
/// run weight, onto the fast-adapted prior. The prior itself is untouched;
/// this update is location-specific and discarded after the control step.
std::pair<wblr::NigPosterior, wblr::NigPosterior> build_predictive_model(
    const wblr::NigPosterior& fast_speed, const wblr::NigPosterior& fast_turn,
    const ExperienceStore& store, std::span<const int> upcoming_vertex_ids,
    std::span<const RunAssessment> assessments);

}  // namespace pathlearn
