#include "luxloop/trial.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "luxloop/rng.hpp"

namespace luxloop {

namespace {

// Distinct stream tags so the agent's exploration draws and the sensor noise
// never share a sequence.
constexpr std::uint64_t kAgentStream = 0x61;
constexpr std::uint64_t kEnvStream = 0x65;

EnvModel seeded_scenario(const TrialConfig& cfg) {
  EnvModel model = cfg.scenario;
  model.rng_seed = derive_seed(cfg.seed, kEnvStream);
  return model;
}

}  // namespace

void TrialConfig::validate() const {
  if (convergence_hold < 1) throw std::invalid_argument("convergence_hold must be >= 1");
  if (max_steps < convergence_hold)
    throw std::invalid_argument("max_steps must be >= convergence_hold");
  if (target.target_state < 0 || target.target_state >= kNumStates)
    throw std::invalid_argument("target state out of range");
  if (initial_pwm < 0 || initial_pwm > kPwmMax)
    throw std::invalid_argument("initial_pwm outside [0, 255]");
  agent.validate();
  scenario.validate();
}

std::vector<int> EpisodeRecord::states() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.state);
  return out;
}

std::string EpisodeRecord::to_csv() const {
  std::string out = kEpisodeCsvHeader;
  out += '\n';
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%ld,%d,%.4f,%d,%d,%d,%d,%.6f\n", r.t, r.raw,
                  r.smoothed, r.state, r.action, r.pwm, r.reward, r.epsilon);
    out += line;
  }
  return out;
}

std::optional<long> detect_convergence(std::span<const int> states, int target_state,
                                       int hold) {
  if (hold < 1) throw std::invalid_argument("hold must be >= 1");
  int run = 0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    run = (states[t] == target_state) ? run + 1 : 0;
    if (run >= hold) return static_cast<long>(t);
  }
  return std::nullopt;
}

ControlSession::ControlSession(const TrialConfig& cfg)
    : ControlSession(cfg, QTable(kNumStates, cfg.agent.num_actions()),
                     cfg.agent.epsilon_initial) {}

ControlSession::ControlSession(const TrialConfig& cfg, QTable table, double epsilon)
    : cfg_(cfg),
      env_(seeded_scenario(cfg)),
      table_(std::move(table)),
      rng_(make_rng(derive_seed(cfg.seed, kAgentStream))),
      epsilon_(epsilon),
      pwm_(cfg.initial_pwm) {
  cfg_.validate();
  if (table_.num_states() != kNumStates ||
      table_.num_actions() != cfg_.agent.num_actions())
    throw std::invalid_argument("carried table shape does not match agent config");
  // Initial sensing establishes the starting state; it is not a control step.
  const AdcReading first = env_.step(pwm_);
  state_ = discretize(first.smoothed);
}

bool ControlSession::done() const {
  return converged_ || steps_ >= cfg_.max_steps;
}

StepRow ControlSession::step() {
  const double eps_used = epsilon_;
  const int action = select_action(table_, state_, epsilon_, rng_);
  pwm_ = clamp_pwm(pwm_ + cfg_.agent.action_deltas[action]);
  const AdcReading reading = env_.step(pwm_);
  const int next_state = discretize(reading.smoothed);
  const int reward = reward_for(next_state, cfg_.target);
  q_update(table_, state_, action, reward, next_state, cfg_.agent);
  epsilon_ = decay_epsilon(epsilon_, cfg_.agent);
  state_ = next_state;
  ++steps_;

  hold_run_ = (next_state == cfg_.target.target_state) ? hold_run_ + 1 : 0;
  if (!converged_ && hold_run_ >= cfg_.convergence_hold) {
    converged_ = true;
    steps_to_converge_ = steps_;
  }

  StepRow row{steps_, reading.raw, reading.smoothed, next_state, action, pwm_,
              reward, eps_used};
  rows_.push_back(row);
  return row;
}

void ControlSession::set_target(const TargetLevel& target) {
  if (target.target_state < 0 || target.target_state >= kNumStates)
    throw std::invalid_argument("target state out of range");
  if (target.target_state == cfg_.target.target_state) {
    cfg_.target = target;  // reasserting the same target does not restart
    return;
  }
  cfg_.target = target;
  hold_run_ = 0;
  converged_ = false;
  steps_to_converge_.reset();
}

bool ControlSession::replace_table(const QTable& table) {
  if (!table_.same_shape(table)) return false;
  table_ = table;
  return true;
}

EpisodeRecord ControlSession::take_record() {
  EpisodeRecord rec;
  rec.rows = std::move(rows_);
  rec.converged = converged_;
  rec.steps_to_converge = steps_to_converge_;
  return rec;
}

EpisodeRecord run_trial(const TrialConfig& cfg) {
  QTable table(kNumStates, cfg.agent.num_actions());
  double epsilon = cfg.agent.epsilon_initial;
  return run_trial(cfg, table, epsilon);
}

EpisodeRecord run_trial(const TrialConfig& cfg, QTable& table_io, double& epsilon_io) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ControlSession session(cfg, std::move(table_io), epsilon_io);
  while (!session.done()) session.step();
  const auto stop = std::chrono::steady_clock::now();

  EpisodeRecord rec = session.take_record();
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  epsilon_io = session.epsilon();
  table_io = session.take_table();
  return rec;
}

nlohmann::ordered_json trial_sidecar_json(const TrialConfig& cfg,
                                          const EpisodeRecord& record) {
  nlohmann::ordered_json j;
  j["target"] = cfg.target.label;
  j["target_state"] = cfg.target.target_state;
  j["seed"] = cfg.seed;
  j["max_steps"] = cfg.max_steps;
  j["convergence_hold"] = cfg.convergence_hold;
  j["initial_pwm"] = cfg.initial_pwm;
  j["converged"] = record.converged;
  if (record.steps_to_converge)
    j["steps_to_converge"] = *record.steps_to_converge;
  else
    j["steps_to_converge"] = nullptr;
  j["executed_steps"] = record.rows.size();
  j["wall_time_ms"] = record.wall_time_ms;
  j["agent"] = agent_config_to_json(cfg.agent);
  j["scenario"] = scenario_to_json(cfg.scenario);
  return j;
}

void write_episode_csv(const std::string& path, const EpisodeRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << record.to_csv();
}

namespace {

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(std::string_view field, double& out) {
  // std::from_chars for doubles is missing in some standard libraries; strtod
  // on a bounded copy is portable and strict enough here.
  char buf[64];
  if (field.empty() || field.size() >= sizeof(buf)) return false;
  std::memcpy(buf, field.data(), field.size());
  buf[field.size()] = '\0';
  char* end = nullptr;
  out = std::strtod(buf, &end);
  return end == buf + field.size();
}

}  // namespace

std::vector<StepRow> parse_episode_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty episode CSV");
  if (line.ends_with('\r')) line.pop_back();
  if (line != kEpisodeCsvHeader)
    throw std::runtime_error("bad episode CSV header: expected '" +
                             std::string(kEpisodeCsvHeader) + "'");

  std::vector<StepRow> rows;
  long row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.ends_with('\r')) line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }

    StepRow r;
    const bool ok = fields.size() == 8 && parse_number(fields[0], r.t) &&
                    parse_number(fields[1], r.raw) && parse_double(fields[2], r.smoothed) &&
                    parse_number(fields[3], r.state) && parse_number(fields[4], r.action) &&
                    parse_number(fields[5], r.pwm) && parse_number(fields[6], r.reward) &&
                    parse_double(fields[7], r.epsilon);
    if (!ok)
      throw std::runtime_error("malformed episode CSV at data row " +
                               std::to_string(row_number));
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("episode CSV has no data rows");
  return rows;
}

std::vector<StepRow> load_episode_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_episode_csv(in);
}

}  // namespace luxloop
