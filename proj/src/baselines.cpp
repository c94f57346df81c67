#include "luxloop/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace luxloop {

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Rl: return "rl";
    case ControllerKind::OpenLoop: return "open_loop";
    case ControllerKind::ClosedLoop: return "closed_loop";
  }
  return "rl";
}

int open_loop_controller(const OpenLoopConfig& cfg, long t) {
  (void)t;
  return clamp_pwm(cfg.duty);
}

int closed_loop_controller(double smoothed, const TargetLevel& target,
                           const ClosedLoopConfig& cfg, int current_pwm) {
  if (cfg.band < 0.0) throw std::invalid_argument("band must be >= 0");
  if (cfg.step < 1) throw std::invalid_argument("step must be >= 1");
  const double center = state_bin_center(target.target_state);
  if (smoothed < center - cfg.band) return clamp_pwm(current_pwm + cfg.step);
  if (smoothed > center + cfg.band) return clamp_pwm(current_pwm - cfg.step);
  return current_pwm;
}

EnergyEntry energy_account(std::span<const int> pwm_trace, double p_max) {
  if (pwm_trace.empty()) throw std::invalid_argument("energy_account of empty trace");
  if (!(p_max > 0.0)) throw std::invalid_argument("p_max must be positive");
  double duty_sum = 0.0;
  for (int duty : pwm_trace) duty_sum += static_cast<double>(duty) / kPwmMax;
  EnergyEntry entry;
  entry.consumed_watts = p_max * (duty_sum / static_cast<double>(pwm_trace.size()));
  entry.saved_watts = p_max - entry.consumed_watts;
  entry.duration_steps = static_cast<long>(pwm_trace.size());
  return entry;
}

namespace {

struct ControllerRun {
  std::vector<int> pwm_trace;
  double mean_abs_state_error = 0.0;
};

ControllerRun run_controller(ControllerKind kind, const TargetLevel& target,
                             const EnvModel& scenario, const QTable& trained,
                             const std::vector<int>& deltas, const CompareConfig& cfg) {
  EnvModel model = scenario;
  model.rng_seed = cfg.env_seed;
  Environment env(model);

  const std::vector<int> policy =
      kind == ControllerKind::Rl ? greedy_policy(trained) : std::vector<int>{};

  int pwm = clamp_pwm(cfg.initial_pwm);
  AdcReading reading = env.step(pwm);  // initial sensing, before any command

  ControllerRun run;
  run.pwm_trace.reserve(cfg.duration_steps);
  double abs_err_sum = 0.0;
  for (long t = 0; t < cfg.duration_steps; ++t) {
    const int state = discretize(reading.smoothed);
    switch (kind) {
      case ControllerKind::Rl:
        pwm = clamp_pwm(pwm + deltas[policy[state]]);
        break;
      case ControllerKind::OpenLoop:
        pwm = open_loop_controller(cfg.open_loop, t);
        break;
      case ControllerKind::ClosedLoop:
        pwm = closed_loop_controller(reading.smoothed, target, cfg.closed_loop, pwm);
        break;
    }
    run.pwm_trace.push_back(pwm);
    reading = env.step(pwm);
    abs_err_sum += std::abs(discretize(reading.smoothed) - target.target_state);
  }
  run.mean_abs_state_error = abs_err_sum / static_cast<double>(cfg.duration_steps);
  return run;
}

}  // namespace

EnergyReport compare_controllers(const TargetLevel& target, const EnvModel& scenario,
                                 const QTable& trained_policy,
                                 const std::vector<int>& action_deltas,
                                 const CompareConfig& cfg) {
  if (cfg.duration_steps < 1) throw std::invalid_argument("duration_steps must be >= 1");
  if (cfg.controllers.empty()) throw std::invalid_argument("no controllers requested");
  for (ControllerKind kind : cfg.controllers) {
    if (kind == ControllerKind::Rl &&
        static_cast<int>(action_deltas.size()) != trained_policy.num_actions())
      throw std::invalid_argument("trained table does not match the action set");
  }

  EnergyReport report;
  report.p_max = cfg.p_max;
  report.target = target;
  for (ControllerKind kind : cfg.controllers) {
    const ControllerRun run =
        run_controller(kind, target, scenario, trained_policy, action_deltas, cfg);
    EnergyEntry entry = energy_account(run.pwm_trace, cfg.p_max);
    entry.controller = controller_name(kind);
    entry.mean_abs_state_error = run.mean_abs_state_error;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

nlohmann::ordered_json energy_report_to_json(const EnergyReport& report) {
  nlohmann::ordered_json j;
  j["p_max_watts"] = report.p_max;
  j["target"] = report.target.label;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json ej;
    ej["controller"] = e.controller;
    ej["consumed_watts"] = e.consumed_watts;
    ej["saved_watts"] = e.saved_watts;
    ej["mean_abs_state_error"] = e.mean_abs_state_error;
    ej["duration_steps"] = e.duration_steps;
    j["entries"].push_back(ej);
  }
  return j;
}

std::string energy_report_csv(const EnergyReport& report) {
  std::string out = "controller,consumed_watts,saved_watts,mean_abs_state_error\n";
  char line[160];
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f\n", e.controller.c_str(),
                  e.consumed_watts, e.saved_watts, e.mean_abs_state_error);
    out += line;
  }
  return out;
}

}  // namespace luxloop
