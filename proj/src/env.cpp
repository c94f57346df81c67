#include "luxloop/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "luxloop/rng.hpp"

namespace luxloop {

int clamp_pwm(int duty) { return std::clamp(duty, 0, kPwmMax); }

int discretize(double smoothed) {
  if (!(smoothed >= 0.0 && smoothed <= static_cast<double>(kAdcMax)))
    throw std::out_of_range("smoothed reading outside [0, 1023]");
  const int state = static_cast<int>(smoothed / kStateBinWidth);
  return std::min(state, kNumStates - 1);
}

double smooth_reading(double previous, double raw, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("smoothing alpha must be in (0, 1]");
  return previous + alpha * (raw - previous);
}

TargetLevel target_band(const std::string& label) {
  const auto fail = [&] {
    throw std::invalid_argument("unknown target level '" + label +
                                "' (valid labels are L1..L13)");
  };
  if (label.size() < 2 || label.size() > 3 || label[0] != 'L') fail();
  int index = 0;
  for (std::size_t i = 1; i < label.size(); ++i) {
    if (label[i] < '0' || label[i] > '9') fail();
    index = index * 10 + (label[i] - '0');
  }
  if (index < 1 || index > 13) fail();
  return TargetLevel{label, 3 + 5 * (index - 1)};
}

std::vector<TargetLevel> all_target_levels() {
  std::vector<TargetLevel> levels;
  levels.reserve(13);
  for (int i = 1; i <= 13; ++i) levels.push_back(target_band("L" + std::to_string(i)));
  return levels;
}

double state_bin_center(int state) {
  if (state < 0 || state >= kNumStates)
    throw std::out_of_range("state index out of range");
  return kStateBinWidth * state + kStateBinWidth / 2.0;
}

void DisturbanceEvent::validate() const {
  if (duration_steps < 1) throw std::invalid_argument("event duration must be >= 1");
  if (!std::isfinite(magnitude)) throw std::invalid_argument("non-finite event magnitude");
}

double DisturbanceEvent::contribution(long t) const {
  const long k = t - start_step;
  if (k < 0 || k >= duration_steps) return 0.0;
  switch (kind) {
    case Kind::Step:
      return magnitude;
    case Kind::Flicker:
      return (k % 2 == 0) ? magnitude : -magnitude;
    case Kind::Spike: {
      const long rise = std::max<long>(1, duration_steps / 5);
      if (k < rise) return magnitude * static_cast<double>(k + 1) / static_cast<double>(rise);
      const long tail = std::max<long>(1, duration_steps - rise);
      return magnitude * std::exp(-5.0 * static_cast<double>(k - rise + 1) /
                                  static_cast<double>(tail));
    }
  }
  return 0.0;
}

std::string kind_name(DisturbanceEvent::Kind kind) {
  switch (kind) {
    case DisturbanceEvent::Kind::Spike: return "spike";
    case DisturbanceEvent::Kind::Step: return "step";
    case DisturbanceEvent::Kind::Flicker: return "flicker";
  }
  return "step";
}

DisturbanceEvent::Kind kind_from_name(const std::string& name) {
  if (name == "spike") return DisturbanceEvent::Kind::Spike;
  if (name == "step") return DisturbanceEvent::Kind::Step;
  if (name == "flicker") return DisturbanceEvent::Kind::Flicker;
  throw std::invalid_argument("unknown disturbance kind '" + name + "'");
}

void EnvModel::validate() const {
  if (led_gain < 0.0) throw std::invalid_argument("led_gain must be >= 0");
  if (sensor_noise_sigma < 0.0) throw std::invalid_argument("sensor_noise_sigma must be >= 0");
  if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0))
    throw std::invalid_argument("smoothing_alpha must be in (0, 1]");
  if (response_lag_steps < 0) throw std::invalid_argument("response_lag_steps must be >= 0");
  for (const auto& e : events) e.validate();
}

double EnvModel::ambient_at(long t) const {
  double level = ambient_baseline;
  for (const auto& e : events) level += e.contribution(t);
  return std::max(0.0, level);
}

EnvModel inject_disturbance(EnvModel model, DisturbanceEvent event) {
  event.validate();
  model.events.push_back(event);
  return model;
}

EnvModel scenario_from_json(const nlohmann::json& j) {
  EnvModel model;
  model.ambient_baseline = j.value("baseline", model.ambient_baseline);
  model.led_gain = j.value("led_gain", model.led_gain);
  model.sensor_noise_sigma = j.value("sensor_noise_sigma", model.sensor_noise_sigma);
  model.smoothing_alpha = j.value("smoothing_alpha", model.smoothing_alpha);
  model.response_lag_steps = j.value("response_lag_steps", model.response_lag_steps);
  if (j.contains("events")) {
    for (const auto& ej : j.at("events")) {
      DisturbanceEvent e;
      e.kind = kind_from_name(ej.at("kind").get<std::string>());
      e.start_step = ej.at("start_step").get<long>();
      e.duration_steps = ej.at("duration_steps").get<long>();
      e.magnitude = ej.at("magnitude").get<double>();
      model.events.push_back(e);
    }
  }
  model.validate();
  return model;
}

nlohmann::ordered_json scenario_to_json(const EnvModel& model) {
  nlohmann::ordered_json j;
  j["baseline"] = model.ambient_baseline;
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : model.events) {
    nlohmann::ordered_json ej;
    ej["kind"] = kind_name(e.kind);
    ej["start_step"] = e.start_step;
    ej["duration_steps"] = e.duration_steps;
    ej["magnitude"] = e.magnitude;
    j["events"].push_back(ej);
  }
  j["led_gain"] = model.led_gain;
  j["sensor_noise_sigma"] = model.sensor_noise_sigma;
  j["smoothing_alpha"] = model.smoothing_alpha;
  j["response_lag_steps"] = model.response_lag_steps;
  return j;
}

EnvModel load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

Environment::Environment(EnvModel model)
    : model_(std::move(model)), rng_(make_rng(model_.rng_seed)) {
  model_.validate();
}

AdcReading Environment::step(int pwm) {
  pwm = clamp_pwm(pwm);
  duty_queue_.push_back(pwm);
  while (duty_queue_.size() > static_cast<std::size_t>(model_.response_lag_steps) + 1)
    duty_queue_.pop_front();
  const int effective = duty_queue_.front();

  double level = model_.ambient_at(t_) +
                 model_.led_gain * (static_cast<double>(effective) / kPwmMax);
  if (model_.sensor_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, model_.sensor_noise_sigma);
    level += noise(rng_);
  }
  const long rounded = std::llround(level);
  const int raw = static_cast<int>(std::clamp<long>(rounded, 0, kAdcMax));

  smoothed_ = primed_ ? smooth_reading(smoothed_, raw, model_.smoothing_alpha)
                      : static_cast<double>(raw);
  primed_ = true;
  ++t_;
  return AdcReading{raw, smoothed_};
}

}  // namespace luxloop
