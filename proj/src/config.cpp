#include "pathlearn/config.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace pathlearn {

namespace {

using nlohmann::ordered_json;

void expect_keys(const ordered_json& j, std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (key == k) known = true;
    if (!known)
      throw std::runtime_error("unknown config key '" + key + "' in " + where);
  }
}

template <typename T>
void maybe(const ordered_json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(StackConfig& config, const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  expect_keys(j, {"horizon", "dt", "desired_speed", "weights", "chance",
                  "bounds", "gains", "sqp", "learning",
                  "closed_loop_covariance"},
              "config");

  ControllerConfig& c = config.controller;
  maybe(j, "horizon", c.horizon);
  maybe(j, "dt", c.dt);
  maybe(j, "desired_speed", c.desired_speed);
  maybe(j, "closed_loop_covariance", c.closed_loop_covariance);

  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    expect_keys(w,
                {"lag", "contour", "heading", "speed", "turn", "v_cmd_dev",
                 "omega_cmd_dev", "v_ref_dev", "v_cmd_rate", "omega_cmd_rate",
                 "v_ref_rate", "slack_linear", "slack_quadratic"},
                "weights");
    maybe(w, "lag", c.weights.lag);
    maybe(w, "contour", c.weights.contour);
    maybe(w, "heading", c.weights.heading);
    maybe(w, "speed", c.weights.speed);
    maybe(w, "turn", c.weights.turn);
    maybe(w, "v_cmd_dev", c.weights.v_cmd_dev);
    maybe(w, "omega_cmd_dev", c.weights.omega_cmd_dev);
    maybe(w, "v_ref_dev", c.weights.v_ref_dev);
    maybe(w, "v_cmd_rate", c.weights.v_cmd_rate);
    maybe(w, "omega_cmd_rate", c.weights.omega_cmd_rate);
    maybe(w, "v_ref_rate", c.weights.v_ref_rate);
    maybe(w, "slack_linear", c.weights.slack_linear);
    maybe(w, "slack_quadratic", c.weights.slack_quadratic);
  }
  if (j.contains("chance")) {
    const auto& ch = j.at("chance");
    expect_keys(ch, {"e_c_max", "r_c", "r_u"}, "chance");
    maybe(ch, "e_c_max", c.chance.e_c_max);
    maybe(ch, "r_c", c.chance.r_c);
    maybe(ch, "r_u", c.chance.r_u);
  }
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    expect_keys(b,
                {"v_cmd_min", "v_cmd_max", "omega_cmd_min", "omega_cmd_max",
                 "v_ref_min", "v_ref_max"},
                "bounds");
    maybe(b, "v_cmd_min", c.chance.bounds.v_cmd_min);
    maybe(b, "v_cmd_max", c.chance.bounds.v_cmd_max);
    maybe(b, "omega_cmd_min", c.chance.bounds.omega_cmd_min);
    maybe(b, "omega_cmd_max", c.chance.bounds.omega_cmd_max);
    maybe(b, "v_ref_min", c.chance.bounds.v_ref_min);
    maybe(b, "v_ref_max", c.chance.bounds.v_ref_max);
  }
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    expect_keys(g, {"k_v", "k_theta"}, "gains");
    maybe(g, "k_v", c.gains.k_v);
    maybe(g, "k_theta", c.gains.k_theta);
  }
  if (j.contains("sqp")) {
    const auto& s = j.at("sqp");
    expect_keys(s, {"passes", "trust_speed", "trust_turn", "qp_max_iterations"},
                "sqp");
    maybe(s, "passes", c.sqp.passes);
    maybe(s, "trust_speed", c.sqp.trust_speed);
    maybe(s, "trust_turn", c.sqp.trust_turn);
    maybe(s, "qp_max_iterations", c.sqp.qp_max_iterations);
  }
  if (j.contains("learning")) {
    const auto& l = j.at("learning");
    expect_keys(l,
                {"n0", "recent_samples", "prior_tau", "prior_sigma2",
                 "prior_a", "z_threshold", "exceed_prob", "alpha",
                 "gaussian_likelihood"},
                "learning");
    LearningConfig& lc = config.learning;
    maybe(l, "n0", lc.n0);
    maybe(l, "recent_samples", lc.recent_samples);
    maybe(l, "prior_tau", lc.prior_tau);
    maybe(l, "prior_sigma2", lc.prior_sigma2);
    maybe(l, "prior_a", lc.prior_a);
    maybe(l, "z_threshold", lc.outlier.z_threshold);
    maybe(l, "exceed_prob", lc.outlier.exceed_prob);
    maybe(l, "alpha", lc.outlier.alpha);
    maybe(l, "gaussian_likelihood", lc.gaussian_likelihood);
  }
}

StackConfig load_stack_config(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open config file: " + filename);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  StackConfig config;
  apply_config_json(config, text);
  return config;
}

std::string stack_config_to_json(const StackConfig& config) {
  const ControllerConfig& c = config.controller;
  const LearningConfig& l = config.learning;
  ordered_json j;
  j["horizon"] = c.horizon;
  j["dt"] = c.dt;
  j["desired_speed"] = c.desired_speed;
  j["closed_loop_covariance"] = c.closed_loop_covariance;
  j["weights"] = {{"lag", c.weights.lag},
                  {"contour", c.weights.contour},
                  {"heading", c.weights.heading},
                  {"speed", c.weights.speed},
                  {"turn", c.weights.turn},
                  {"v_cmd_dev", c.weights.v_cmd_dev},
                  {"omega_cmd_dev", c.weights.omega_cmd_dev},
                  {"v_ref_dev", c.weights.v_ref_dev},
                  {"v_cmd_rate", c.weights.v_cmd_rate},
                  {"omega_cmd_rate", c.weights.omega_cmd_rate},
                  {"v_ref_rate", c.weights.v_ref_rate},
                  {"slack_linear", c.weights.slack_linear},
                  {"slack_quadratic", c.weights.slack_quadratic}};
  j["chance"] = {{"e_c_max", c.chance.e_c_max},
                 {"r_c", c.chance.r_c},
                 {"r_u", c.chance.r_u}};
  j["bounds"] = {{"v_cmd_min", c.chance.bounds.v_cmd_min},
                 {"v_cmd_max", c.chance.bounds.v_cmd_max},
                 {"omega_cmd_min", c.chance.bounds.omega_cmd_min},
                 {"omega_cmd_max", c.chance.bounds.omega_cmd_max},
                 {"v_ref_min", c.chance.bounds.v_ref_min},
                 {"v_ref_max", c.chance.bounds.v_ref_max}};
  j["gains"] = {{"k_v", c.gains.k_v}, {"k_theta", c.gains.k_theta}};
  j["sqp"] = {{"passes", c.sqp.passes},
              {"trust_speed", c.sqp.trust_speed},
              {"trust_turn", c.sqp.trust_turn},
              {"qp_max_iterations", c.sqp.qp_max_iterations}};
  j["learning"] = {{"n0", l.n0},
                   {"recent_samples", l.recent_samples},
                   {"prior_tau", l.prior_tau},
                   {"prior_sigma2", l.prior_sigma2},
                   {"prior_a", l.prior_a},
                   {"z_threshold", l.outlier.z_threshold},
                   {"exceed_prob", l.outlier.exceed_prob},
                   {"alpha", l.outlier.alpha},
                   {"gaussian_likelihood", l.gaussian_likelihood}};
  return j.dump(2) + "\n";
}

}  // namespace pathlearn
