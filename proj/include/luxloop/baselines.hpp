#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxloop/agent.hpp"
#include "luxloop/env.hpp"

namespace luxloop {

enum class ControllerKind { Rl, OpenLoop, ClosedLoop };

std::string controller_name(ControllerKind kind);

struct OpenLoopConfig {
  int duty = kPwmMax;  // fixed output, no feedback
};

// Fixed-output reference controller.
int open_loop_controller(const OpenLoopConfig& cfg, long t);

struct ClosedLoopConfig {
  double band = 8.0;  // half-width around the target bin center, counts
  int step = 8;       // duty change per control step
};

// Dead-band feedback controller: nudge duty up below the band, down above it,
// hold inside it. Never moves by more than `step` per control step.
int closed_loop_controller(double smoothed, const TargetLevel& target,
                           const ClosedLoopConfig& cfg, int current_pwm);

struct EnergyEntry {
  std::string controller;
  double consumed_watts = 0.0;
  double saved_watts = 0.0;  // against the full-brightness reference
  double mean_abs_state_error = 0.0;
  long duration_steps = 0;
};

struct EnergyReport {
  double p_max = 6.0;
  TargetLevel target;
  std::vector<EnergyEntry> entries;
};

// Average electrical power of a duty trace: consumed = p_max * mean(duty/255),
// saved = p_max - consumed.
EnergyEntry energy_account(std::span<const int> pwm_trace, double p_max);

struct CompareConfig {
  long duration_steps = 2000;
  double p_max = 6.0;
  std::vector<ControllerKind> controllers = {ControllerKind::Rl, ControllerKind::OpenLoop,
                                             ControllerKind::ClosedLoop};
  OpenLoopConfig open_loop;
  ClosedLoopConfig closed_loop;
  std::uint64_t env_seed = 0;  // shared across controllers: identical noise
  int initial_pwm = 0;
};

// Runs the requested controllers on identical scenario and noise sequence and
// accounts their energy. The RL entry follows the trained table greedily.
EnergyReport compare_controllers(const TargetLevel& target, const EnvModel& scenario,
                                 const QTable& trained_policy,
                                 const std::vector<int>& action_deltas,
                                 const CompareConfig& cfg);

nlohmann::ordered_json energy_report_to_json(const EnergyReport& report);
// controller,consumed_watts,saved_watts,mean_abs_state_error
std::string energy_report_csv(const EnergyReport& report);

}  // namespace luxloop
