#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxloop/agent.hpp"

namespace luxloop {

inline constexpr int kAdcMax = 1023;           // 10-bit sensor full scale
inline constexpr int kPwmMax = 255;            // 8-bit duty full scale
inline constexpr int kStateBinWidth = 16;      // 1024 counts / 64 states
inline constexpr double kControlStepMs = 50.0; // simulated control period

int clamp_pwm(int duty);

// floor(smoothed / 16), clamped to 63. Total on [0, 1023].
int discretize(double smoothed);

// Exponential moving average: previous + alpha * (raw - previous).
double smooth_reading(double previous, double raw, double alpha);

// L1..L13 map to states 3, 8, 13, ..., 63 (evenly spaced, strictly increasing).
TargetLevel target_band(const std::string& label);
std::vector<TargetLevel> all_target_levels();

// Midpoint of a state's 16-count sensor bin.
double state_bin_center(int state);

struct DisturbanceEvent {
  enum class Kind { Spike, Step, Flicker };
  Kind kind = Kind::Step;
  long start_step = 0;
  long duration_steps = 1;
  double magnitude = 0.0;  // signed, ADC counts

  // Additive ambient contribution at absolute step t; zero outside the event.
  // Spike: quick ramp to the full magnitude, then exponential decay back to
  // near zero before the event ends. Step: constant offset. Flicker:
  // alternating +/- magnitude every step.
  double contribution(long t) const;
  void validate() const;
};

std::string kind_name(DisturbanceEvent::Kind kind);
DisturbanceEvent::Kind kind_from_name(const std::string& name);

// Photometric model of the desk rig: ambient light plus an LED whose output
// scales linearly with duty, read through a noisy sensor and an EMA filter.
struct EnvModel {
  double ambient_baseline = 16.0;
  std::vector<DisturbanceEvent> events;
  double led_gain = 1275.0;  // counts added at full duty
  double sensor_noise_sigma = 4.0;
  double smoothing_alpha = 0.4;
  int response_lag_steps = 0;
  std::uint64_t rng_seed = 0;

  // baseline + active event contributions, floored at zero.
  double ambient_at(long t) const;
  void validate() const;
};

// Returns a copy of the model with the event appended. Overlapping events sum.
EnvModel inject_disturbance(EnvModel model, DisturbanceEvent event);

EnvModel scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const EnvModel& model);
EnvModel load_scenario(const std::string& path);

struct AdcReading {
  int raw = 0;
  double smoothed = 0.0;
};

// Stateful discrete-time instance of an EnvModel: owns the noise stream, the
// smoothing state, and the actuator lag queue. One instance per trial.
class Environment {
 public:
  explicit Environment(EnvModel model);

  // Advance one control step with the given duty command and read the sensor.
  // raw = clamp(ambient(t) + led_gain * effective_duty/255 + noise, 0, 1023)
  // where effective_duty is the command from response_lag_steps ago.
  AdcReading step(int pwm);

  long steps_taken() const { return t_; }
  const EnvModel& model() const { return model_; }

 private:
  EnvModel model_;
  std::mt19937_64 rng_;
  std::deque<int> duty_queue_;
  double smoothed_ = 0.0;
  bool primed_ = false;
  long t_ = 0;
};

}  // namespace luxloop
