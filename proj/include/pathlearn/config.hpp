#pragma once

#include <string>

#include "pathlearn/experience.hpp"
#include "pathlearn/mpc.hpp"

namespace pathlearn {

/// Model-learning settings: recursive prior strength, section windows,
/// base-prior shape, and the run-similarity gate.
struct LearningConfig {
  double n0 = 100.0;
  int recent_samples = 30;
  double prior_tau = 0.5;      // s; base prior encodes w0 = [1/tau, -1/tau]
  double prior_sigma2 = 0.25;  // (m/s^2)^2 resp. (rad/s^2)^2
  double prior_a = 2.0;
  OutlierConfig outlier;
  bool gaussian_likelihood = false;  // Gaussian plug-in instead of Student-t

  wblr::NigPosterior base_prior() const {
    return wblr::NigPosterior::lag_prior(prior_tau, prior_sigma2, prior_a);
  }
  wblr::PredictiveFamily family() const {
    return gaussian_likelihood ? wblr::PredictiveFamily::kGaussian
                               : wblr::PredictiveFamily::kStudentT;
  }
};

/// Full controller stack configuration. Defaults reproduce the reference
/// tuning: penalties 50/200/200/2/2, input penalties 1/1/50, rates 10/15/5,
/// e_c_max 2 m, r_c 1, gains -5, n0 100, 30-sample recent window, 3 s
/// horizon at 10 Hz solved with 3 SQP passes.
struct StackConfig {
  ControllerConfig controller;
  LearningConfig learning;
};

/// JSON (de)serialization. Unknown keys are rejected; missing keys keep
/// their defaults.
StackConfig load_stack_config(const std::string& filename);
void apply_config_json(StackConfig& config, const std::string& json_text);
std::string stack_config_to_json(const StackConfig& config);

}  // namespace pathlearn
