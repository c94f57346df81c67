#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace luxloop {

// Discrete light states: 64 bins over the 10-bit sensor range.
inline constexpr int kNumStates = 64;

// Default action set: coarse steps to escape quickly, fine steps to settle,
// and a hold action. Deltas are PWM duty changes, applied with clamping.
inline const std::vector<int> kDefaultActionDeltas = {-32, -8, 0, 8, 32};

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_initial = 0.5;
  double epsilon_decay = 0.999;  // multiplicative, per control step
  double epsilon_min = 0.01;
  std::vector<int> action_deltas = kDefaultActionDeltas;
  std::uint64_t rng_seed = 0;

  int num_actions() const { return static_cast<int>(action_deltas.size()); }
  void validate() const;  // throws std::invalid_argument
};

// Dense state-action value table plus per-entry visit counters.
// Values start at zero; visit counts only ever increase.
class QTable {
 public:
  QTable() = default;
  QTable(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double value(int s, int a) const { return values_[index(s, a)]; }
  void set_value(int s, int a, double v) { values_[index(s, a)] = v; }
  std::uint64_t visits(int s, int a) const { return visit_counts_[index(s, a)]; }
  void bump_visit(int s, int a) { ++visit_counts_[index(s, a)]; }

  double max_value(int s) const;
  int argmax(int s) const;  // lowest index wins ties

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint64_t>& visit_counts() const { return visit_counts_; }
  std::vector<double>& mutable_values() { return values_; }
  std::vector<std::uint64_t>& mutable_visit_counts() { return visit_counts_; }

  bool same_shape(const QTable& other) const {
    return num_states_ == other.num_states_ && num_actions_ == other.num_actions_;
  }
  bool operator==(const QTable& other) const = default;

  void check_state(int s) const;            // throws std::out_of_range
  void check_indices(int s, int a) const;   // throws std::out_of_range

 private:
  std::size_t index(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
           static_cast<std::size_t>(a);
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> values_;
  std::vector<std::uint64_t> visit_counts_;
};

// One of the 13 setpoints L1..L13, identified with a single discrete state.
struct TargetLevel {
  std::string label;
  int target_state = 0;
  bool operator==(const TargetLevel& other) const = default;
};

// Single value-table backup:
//   Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s_next, a') - Q(s,a))
// Touches exactly the (s,a) entry and bumps its visit counter.
void q_update(QTable& table, int s, int a, double reward, int s_next,
              const AgentConfig& cfg);

// Epsilon-greedy action choice: with probability epsilon a uniformly random
// action, otherwise an argmax action with uniform random tie-breaking.
int select_action(const QTable& table, int s, double epsilon, std::mt19937_64& rng);

// max(epsilon_min, epsilon * epsilon_decay)
double decay_epsilon(double epsilon, const AgentConfig& cfg);

// Sparse binary reward: +1 exactly at the target state, -1 everywhere else.
int reward_for(int s, const TargetLevel& target);

// Deterministic per-state greedy actions (lowest-index tie-break), for
// evaluation and policy comparison.
std::vector<int> greedy_policy(const QTable& table);

// JSON serialization with stable field ordering so saved tables diff cleanly.
nlohmann::ordered_json qtable_to_json(const QTable& table, const AgentConfig& cfg);
QTable qtable_from_json(const nlohmann::json& j, AgentConfig* cfg_out = nullptr);
void save_qtable(const std::string& path, const QTable& table, const AgentConfig& cfg);
QTable load_qtable(const std::string& path, AgentConfig* cfg_out = nullptr);

nlohmann::ordered_json agent_config_to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j);

}  // namespace luxloop
