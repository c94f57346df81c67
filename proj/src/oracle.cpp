#include "luxloop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace luxloop {

int DeskMdp::duty_bucket(int duty) { return std::min(duty / 8, 31); }
int DeskMdp::bucket_duty(int bucket) { return 8 * bucket; }

DeskMdp build_desk_mdp(const EnvModel& model, const TargetLevel& target,
                       const std::vector<int>& action_deltas, double gamma) {
  if (model.sensor_noise_sigma != 0.0)
    throw std::invalid_argument("desk model must be noise-free (sigma = 0)");
  if (model.response_lag_steps != 0)
    throw std::invalid_argument("desk model must be lag-free");
  if (!model.events.empty())
    throw std::invalid_argument("desk model must have a constant ambient profile");
  if (action_deltas.empty()) throw std::invalid_argument("empty action set");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must be in [0, 1) for the oracle");
  model.validate();

  // Transitions use the steady-state reading: one environment step per query
  // with smoothing disabled, so the reading is a pure function of the duty.
  EnvModel steady = model;
  steady.smoothing_alpha = 1.0;
  steady.rng_seed = 0;

  const auto light_at_duty = [&steady](int duty) {
    Environment env(steady);
    return discretize(env.step(duty).smoothed);
  };

  DeskMdp mdp;
  mdp.action_deltas = action_deltas;
  mdp.target_state = target.target_state;
  mdp.gamma = gamma;
  mdp.initial_state = mdp.state_id(light_at_duty(0), DeskMdp::duty_bucket(0));

  const int num_actions = mdp.num_actions();
  mdp.next_state.assign(static_cast<std::size_t>(mdp.num_states()) * num_actions, 0);
  mdp.reward.assign(static_cast<std::size_t>(mdp.num_states()) * num_actions, 0.0);

  // The successor depends only on the duty bucket and the action; the light
  // component of every (light, bucket) pair shares the same outcome.
  for (int bucket = 0; bucket < mdp.num_duty_buckets; ++bucket) {
    for (int a = 0; a < num_actions; ++a) {
      const int duty_next = clamp_pwm(DeskMdp::bucket_duty(bucket) + action_deltas[a]);
      const int light_next = light_at_duty(duty_next);
      const int succ = mdp.state_id(light_next, DeskMdp::duty_bucket(duty_next));
      const double r = light_next == target.target_state ? +1.0 : -1.0;
      for (int light = 0; light < mdp.num_light_bins; ++light) {
        const std::size_t idx =
            static_cast<std::size_t>(mdp.state_id(light, bucket)) * num_actions + a;
        mdp.next_state[idx] = succ;
        mdp.reward[idx] = r;
      }
    }
  }
  return mdp;
}

ValueIterationResult value_iteration(const DeskMdp& mdp, double tolerance,
                                     int max_iters) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0))
    throw std::invalid_argument("gamma must be in [0, 1)");

  const int n = mdp.num_states();
  const int num_actions = mdp.num_actions();
  ValueIterationResult out;
  out.values.assign(n, 0.0);
  std::vector<double> next(n, 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    double residual = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < num_actions; ++a) {
        const double q = mdp.reward_of(s, a) + mdp.gamma * out.values[mdp.successor(s, a)];
        best = std::max(best, q);
      }
      next[s] = best;
      residual = std::max(residual, std::abs(best - out.values[s]));
    }
    out.values.swap(next);
    out.residuals.push_back(residual);
    out.iterations = iter + 1;
    if (residual < tolerance) {
      out.policy.assign(n, 0);
      for (int s = 0; s < n; ++s) {
        int best_a = 0;
        double best_q = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < num_actions; ++a) {
          const double q =
              mdp.reward_of(s, a) + mdp.gamma * out.values[mdp.successor(s, a)];
          if (q > best_q) {
            best_q = q;
            best_a = a;
          }
        }
        out.policy[s] = best_a;
      }
      return out;
    }
  }
  throw std::runtime_error("value iteration did not converge within " +
                           std::to_string(max_iters) + " iterations (residual " +
                           std::to_string(out.residuals.back()) + ")");
}

std::vector<char> reachable_states(const DeskMdp& mdp) {
  std::vector<char> seen(mdp.num_states(), 0);
  std::deque<int> frontier{mdp.initial_state};
  seen[mdp.initial_state] = 1;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const int succ = mdp.successor(s, a);
      if (!seen[succ]) {
        seen[succ] = 1;
        frontier.push_back(succ);
      }
    }
  }
  return seen;
}

double policy_agreement(const QTable& learned, const DeskMdp& mdp,
                        const ValueIterationResult& vi,
                        const std::vector<char>& reachable) {
  if (learned.num_states() != mdp.num_light_bins)
    throw std::invalid_argument("learned table state count does not match the model");
  if (learned.num_actions() != mdp.num_actions())
    throw std::invalid_argument("learned table action count does not match the model");
  if (static_cast<int>(vi.policy.size()) != mdp.num_states() ||
      static_cast<int>(reachable.size()) != mdp.num_states())
    throw std::invalid_argument("oracle result does not match the model");

  constexpr double kValueTol = 1e-9;
  long total = 0;
  long agree = 0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (!reachable[s]) continue;
    ++total;
    // The agent picks from what it can observe: the light bin alone.
    const int learned_action = learned.argmax(mdp.light_of(s));
    const int oracle_action = vi.policy[s];
    const double q_learned = mdp.reward_of(s, learned_action) +
                             mdp.gamma * vi.values[mdp.successor(s, learned_action)];
    const double q_oracle = mdp.reward_of(s, oracle_action) +
                            mdp.gamma * vi.values[mdp.successor(s, oracle_action)];
    if (std::abs(q_learned - q_oracle) <= kValueTol) ++agree;
  }
  if (total == 0) throw std::invalid_argument("no reachable states");
  return static_cast<double>(agree) / static_cast<double>(total);
}

nlohmann::ordered_json oracle_to_json(const DeskMdp& mdp,
                                      const ValueIterationResult& vi) {
  nlohmann::ordered_json j;
  j["num_light_bins"] = mdp.num_light_bins;
  j["num_duty_buckets"] = mdp.num_duty_buckets;
  j["action_deltas"] = mdp.action_deltas;
  j["target_state"] = mdp.target_state;
  j["gamma"] = mdp.gamma;
  j["initial_state"] = mdp.initial_state;
  j["iterations"] = vi.iterations;
  j["values"] = vi.values;
  j["policy"] = vi.policy;
  return j;
}

}  // namespace luxloop
