#include "luxloop/agent.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace luxloop {

void AgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must be in [0, 1]");
  if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_initial && epsilon_initial <= 1.0))
    throw std::invalid_argument("need 0 <= epsilon_min <= epsilon_initial <= 1");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
    throw std::invalid_argument("epsilon_decay must be in (0, 1]");
  if (action_deltas.empty())
    throw std::invalid_argument("action set must not be empty");
  if (!std::isfinite(alpha) || !std::isfinite(gamma))
    throw std::invalid_argument("non-finite hyperparameter");
}

QTable::QTable(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      values_(static_cast<std::size_t>(num_states) * num_actions, 0.0),
      visit_counts_(static_cast<std::size_t>(num_states) * num_actions, 0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("table shape must be positive");
}

void QTable::check_state(int s) const {
  if (s < 0 || s >= num_states_)
    throw std::out_of_range("state index " + std::to_string(s) + " out of range");
}

void QTable::check_indices(int s, int a) const {
  check_state(s);
  if (a < 0 || a >= num_actions_)
    throw std::out_of_range("action index " + std::to_string(a) + " out of range");
}

double QTable::max_value(int s) const {
  double best = value(s, 0);
  for (int a = 1; a < num_actions_; ++a) best = std::max(best, value(s, a));
  return best;
}

int QTable::argmax(int s) const {
  int best = 0;
  for (int a = 1; a < num_actions_; ++a)
    if (value(s, a) > value(s, best)) best = a;
  return best;
}

void q_update(QTable& table, int s, int a, double reward, int s_next,
              const AgentConfig& cfg) {
  table.check_indices(s, a);
  table.check_state(s_next);
  cfg.validate();
  if (!std::isfinite(reward)) throw std::invalid_argument("non-finite reward");

  const double old_q = table.value(s, a);
  const double best_next = table.max_value(s_next);
  if (!std::isfinite(old_q) || !std::isfinite(best_next))
    throw std::invalid_argument("non-finite table entry");

  const double updated = old_q + cfg.alpha * (reward + cfg.gamma * best_next - old_q);
  table.set_value(s, a, updated);
  table.bump_visit(s, a);
}

int select_action(const QTable& table, int s, double epsilon, std::mt19937_64& rng) {
  table.check_state(s);
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must be in [0, 1]");

  const int n = table.num_actions();
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
      std::uniform_int_distribution<int> any(0, n - 1);
      return any(rng);
    }
  }

  // Greedy with uniform tie-breaking. Ties are exact-equal values, which is
  // what a freshly zeroed table or symmetric updates produce.
  const double best = table.max_value(s);
  int tie_count = 0;
  int first = 0;
  for (int a = 0; a < n; ++a) {
    if (table.value(s, a) == best) {
      if (tie_count == 0) first = a;
      ++tie_count;
    }
  }
  if (tie_count == 1) return first;

  std::uniform_int_distribution<int> pick(0, tie_count - 1);
  int want = pick(rng);
  for (int a = 0; a < n; ++a) {
    if (table.value(s, a) == best && want-- == 0) return a;
  }
  return first;  // unreachable
}

double decay_epsilon(double epsilon, const AgentConfig& cfg) {
  return std::max(cfg.epsilon_min, epsilon * cfg.epsilon_decay);
}

int reward_for(int s, const TargetLevel& target) {
  if (s < 0 || s >= kNumStates)
    throw std::out_of_range("state index " + std::to_string(s) + " out of range");
  return s == target.target_state ? +1 : -1;
}

std::vector<int> greedy_policy(const QTable& table) {
  std::vector<int> policy(table.num_states());
  for (int s = 0; s < table.num_states(); ++s) policy[s] = table.argmax(s);
  return policy;
}

nlohmann::ordered_json agent_config_to_json(const AgentConfig& cfg) {
  nlohmann::ordered_json j;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["epsilon_initial"] = cfg.epsilon_initial;
  j["epsilon_decay"] = cfg.epsilon_decay;
  j["epsilon_min"] = cfg.epsilon_min;
  j["action_deltas"] = cfg.action_deltas;
  j["rng_seed"] = cfg.rng_seed;
  return j;
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.epsilon_initial = j.value("epsilon_initial", cfg.epsilon_initial);
  cfg.epsilon_decay = j.value("epsilon_decay", cfg.epsilon_decay);
  cfg.epsilon_min = j.value("epsilon_min", cfg.epsilon_min);
  if (j.contains("action_deltas"))
    cfg.action_deltas = j.at("action_deltas").get<std::vector<int>>();
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json qtable_to_json(const QTable& table, const AgentConfig& cfg) {
  nlohmann::ordered_json j;
  j["num_states"] = table.num_states();
  j["num_actions"] = table.num_actions();
  j["action_deltas"] = cfg.action_deltas;
  j["values"] = table.values();
  j["visit_counts"] = table.visit_counts();
  j["config"] = agent_config_to_json(cfg);
  return j;
}

QTable qtable_from_json(const nlohmann::json& j, AgentConfig* cfg_out) {
  const int ns = j.at("num_states").get<int>();
  const int na = j.at("num_actions").get<int>();
  QTable table(ns, na);
  auto values = j.at("values").get<std::vector<double>>();
  auto visits = j.at("visit_counts").get<std::vector<std::uint64_t>>();
  if (values.size() != table.values().size() || visits.size() != table.visit_counts().size())
    throw std::invalid_argument("q-table payload size does not match declared shape");
  table.mutable_values() = std::move(values);
  table.mutable_visit_counts() = std::move(visits);
  if (cfg_out != nullptr && j.contains("config"))
    *cfg_out = agent_config_from_json(j.at("config"));
  return table;
}

void save_qtable(const std::string& path, const QTable& table, const AgentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << qtable_to_json(table, cfg).dump(2) << '\n';
}

QTable load_qtable(const std::string& path, AgentConfig* cfg_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return qtable_from_json(j, cfg_out);
}

}  // namespace luxloop
