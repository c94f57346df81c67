#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxloop/agent.hpp"
#include "luxloop/env.hpp"

namespace luxloop {

struct TrialConfig {
  TargetLevel target;
  long max_steps = 20000;
  int convergence_hold = 10;  // consecutive in-target steps
  EnvModel scenario;
  AgentConfig agent;
  std::uint64_t seed = 0;  // drives both the agent and the environment streams
  int initial_pwm = 0;

  void validate() const;  // throws std::invalid_argument
};

struct StepRow {
  long t = 0;  // 1-based control step
  int raw = 0;
  double smoothed = 0.0;
  int state = 0;  // state observed after this step's actuation
  int action = 0;
  int pwm = 0;  // commanded duty after applying the action
  int reward = 0;
  double epsilon = 0.0;  // exploration rate used for this step's action
};

inline constexpr char kEpisodeCsvHeader[] = "t,raw,smoothed,state,action,pwm,reward,epsilon";

struct EpisodeRecord {
  std::vector<StepRow> rows;
  bool converged = false;
  std::optional<long> steps_to_converge;  // present iff converged
  double wall_time_ms = 0.0;

  std::vector<int> states() const;
  std::string to_csv() const;
};

// First 0-based index t such that states[t-hold+1 .. t] all equal the target,
// or nullopt if the trajectory never holds the target that long.
std::optional<long> detect_convergence(std::span<const int> states, int target_state,
                                       int hold);

// One agent-in-environment control loop. The same machine backs standalone
// trials and fleet units; a unit just interleaves message handling between
// steps, which keeps offline units step-for-step identical to run_trial.
class ControlSession {
 public:
  explicit ControlSession(const TrialConfig& cfg);
  // Continues learning from carried-in state (table and exploration rate).
  ControlSession(const TrialConfig& cfg, QTable table, double epsilon);

  bool done() const;
  bool converged() const { return converged_; }
  long steps_executed() const { return steps_; }
  int current_state() const { return state_; }
  int current_pwm() const { return pwm_; }
  double epsilon() const { return epsilon_; }
  const QTable& table() const { return table_; }
  const TargetLevel& target() const { return cfg_.target; }

  StepRow step();

  // Re-targets the reward function starting with the next step and restarts
  // convergence detection.
  void set_target(const TargetLevel& target);

  // Replaces the value table when shapes match; returns false (table kept)
  // otherwise.
  bool replace_table(const QTable& table);

  EpisodeRecord take_record();
  QTable take_table() { return std::move(table_); }

 private:
  TrialConfig cfg_;
  Environment env_;
  QTable table_;
  std::mt19937_64 rng_;
  double epsilon_;
  int state_ = 0;
  int pwm_ = 0;
  long steps_ = 0;
  int hold_run_ = 0;
  bool converged_ = false;
  std::optional<long> steps_to_converge_;
  std::vector<StepRow> rows_;
};

EpisodeRecord run_trial(const TrialConfig& cfg);

// Carries learning state across episodes: the table and exploration rate are
// read on entry and written back on return.
EpisodeRecord run_trial(const TrialConfig& cfg, QTable& table_io, double& epsilon_io);

nlohmann::ordered_json trial_sidecar_json(const TrialConfig& cfg,
                                          const EpisodeRecord& record);

void write_episode_csv(const std::string& path, const EpisodeRecord& record);

// Parses an episode CSV. Throws std::runtime_error naming the first bad
// 1-based data row on malformed input; empty input is an error.
std::vector<StepRow> parse_episode_csv(std::istream& in);
std::vector<StepRow> load_episode_csv(const std::string& path);

}  // namespace luxloop
