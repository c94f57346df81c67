#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "luxloop/agent.hpp"
#include "luxloop/env.hpp"

namespace luxloop {

// Exact model of the noise-free, lag-free desk environment. The learning
// agent observes only the light bin; that alone is not Markovian because the
// next reading depends on the current duty, so the model state pairs the
// light bin with the duty bucketed to 32 levels.
struct DeskMdp {
  int num_light_bins = kNumStates;
  int num_duty_buckets = 32;
  std::vector<int> action_deltas;
  int target_state = 0;
  double gamma = 0.9;
  int initial_state = 0;

  // Row-major over (state, action); successor ids and rewards.
  std::vector<int> next_state;
  std::vector<double> reward;

  int num_states() const { return num_light_bins * num_duty_buckets; }
  int num_actions() const { return static_cast<int>(action_deltas.size()); }
  int state_id(int light, int bucket) const { return light * num_duty_buckets + bucket; }
  int light_of(int state) const { return state / num_duty_buckets; }
  int bucket_of(int state) const { return state % num_duty_buckets; }
  int successor(int state, int action) const {
    return next_state[static_cast<std::size_t>(state) * num_actions() + action];
  }
  double reward_of(int state, int action) const {
    return reward[static_cast<std::size_t>(state) * num_actions() + action];
  }

  static int duty_bucket(int duty);   // duty / 8, capped at 31
  static int bucket_duty(int bucket); // representative duty 8 * bucket
};

// Enumerates every (state, action) pair and derives successors through the
// environment itself (single noise-free step plus discretization), so the
// model cannot drift from the simulator. Requires sigma = 0, lag = 0, and a
// constant ambient profile; anything else is a validation error.
DeskMdp build_desk_mdp(const EnvModel& model, const TargetLevel& target,
                       const std::vector<int>& action_deltas, double gamma = 0.9);

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> policy;  // lowest-index tie-break
  std::vector<double> residuals;
  int iterations = 0;
};

// Synchronous Bellman backups until the max-norm change drops below the
// tolerance. Throws std::runtime_error (reporting the residual) if max_iters
// is exhausted first.
ValueIterationResult value_iteration(const DeskMdp& mdp, double tolerance = 1e-9,
                                     int max_iters = 10000);

// States reachable from the initial state under any action sequence.
std::vector<char> reachable_states(const DeskMdp& mdp);

// Fraction of reachable model states where the learned greedy action (chosen
// from the light bin alone) is value-equivalent to the oracle action:
// reward plus discounted successor value match within a tiny tolerance.
double policy_agreement(const QTable& learned, const DeskMdp& mdp,
                        const ValueIterationResult& vi,
                        const std::vector<char>& reachable);

nlohmann::ordered_json oracle_to_json(const DeskMdp& mdp,
                                      const ValueIterationResult& vi);

}  // namespace luxloop
