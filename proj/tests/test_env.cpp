#include <cmath>

#include "doctest.h"
#include "luxloop/env.hpp"
#include "test_oracles.hpp"

using namespace luxloop;

namespace {

EnvModel quiet_model(double ambient, double gain) {
  EnvModel m;
  m.ambient_baseline = ambient;
  m.led_gain = gain;
  m.sensor_noise_sigma = 0.0;
  m.smoothing_alpha = 1.0;
  m.response_lag_steps = 0;
  m.events.clear();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("env");

TEST_CASE("sensor reading is ambient plus scaled LED output") {
  Environment dark(quiet_model(0.0, 800.0));
  CHECK(dark.step(0).raw == 0);

  Environment bright(quiet_model(0.0, 800.0));
  CHECK(bright.step(255).raw == 800);

  Environment lit(quiet_model(260.0, 800.0));
  CHECK(lit.step(0).raw == 260);
}

TEST_CASE("reading clamps to the 10-bit range") {
  Environment env(quiet_model(600.0, 800.0));
  CHECK(env.step(255).raw == kAdcMax);
}

TEST_CASE("noise-free readings are pure in ambient and duty") {
  for (int duty : {0, 50, 128, 255}) {
    Environment a(quiet_model(100.0, 500.0));
    Environment b(quiet_model(100.0, 500.0));
    const int first = a.step(duty).raw;
    CHECK(first == b.step(duty).raw);
    CHECK(a.step(duty).raw == first);  // constant input, constant output
  }
}

TEST_CASE("reading is monotone in duty with fixed ambient and no noise") {
  int previous = -1;
  for (int duty = 0; duty <= 255; ++duty) {
    Environment env(quiet_model(0.0, 1000.0));
    const int raw = env.step(duty).raw;
    CHECK(raw >= previous);
    previous = raw;
  }
}

TEST_CASE("actuator lag delays the effective duty") {
  EnvModel m = quiet_model(0.0, 255.0);  // raw equals effective duty
  m.response_lag_steps = 2;
  Environment env(m);
  CHECK(env.step(10).raw == 10);  // earliest command in effect while filling
  CHECK(env.step(20).raw == 10);
  CHECK(env.step(30).raw == 10);
  CHECK(env.step(40).raw == 20);
  CHECK(env.step(40).raw == 30);
}

TEST_CASE("smoothing is an exponential moving average") {
  CHECK(smooth_reading(123.0, 650.0, 1.0) == 650.0);
  CHECK(smooth_reading(260.0, 650.0, 0.2) == doctest::Approx(338.0).epsilon(1e-12));
  CHECK(smooth_reading(260.0, 650.0, 0.2) ==
        doctest::Approx(testoracle::ema_once(260.0, 650.0, 0.2)));
  CHECK_THROWS_AS(smooth_reading(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_reading(0.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("smoothed value approaches a constant input geometrically") {
  const double alpha = 0.2;
  const double raw = 500.0;
  double smoothed = 20.0;
  const double initial_gap = std::abs(smoothed - raw);
  for (int t = 1; t <= 60; ++t) {
    smoothed = smooth_reading(smoothed, raw, alpha);
    const double bound = std::pow(1.0 - alpha, t) * initial_gap;
    CHECK(std::abs(smoothed - raw) <= bound + 1e-9);
  }
  CHECK(std::abs(smoothed - raw) < 1e-2);
}

TEST_CASE("environment smoothing starts at the first raw sample") {
  EnvModel m = quiet_model(100.0, 255.0);
  m.smoothing_alpha = 0.2;
  Environment env(m);
  const AdcReading first = env.step(0);
  CHECK(first.smoothed == first.raw);
  const AdcReading second = env.step(255);
  CHECK(second.smoothed ==
        doctest::Approx(testoracle::ema_once(first.raw, second.raw, 0.2)));
}

TEST_CASE("discretization covers the full range in 16-count bins") {
  CHECK(discretize(0.0) == 0);
  CHECK(discretize(1023.0) == 63);
  CHECK(discretize(260.0) == 16);
  CHECK(discretize(15.999) == 0);
  CHECK(discretize(16.0) == 1);
  CHECK_THROWS_AS(discretize(-0.5), std::out_of_range);
  CHECK_THROWS_AS(discretize(1024.0), std::out_of_range);

  // Total, monotone, and onto all 64 states.
  int previous = 0;
  bool seen[kNumStates] = {};
  for (int counts = 0; counts <= kAdcMax; ++counts) {
    const int state = discretize(counts);
    CHECK(state >= previous);
    CHECK(state < kNumStates);
    seen[state] = true;
    previous = state;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("target levels map to evenly spaced states up to 63") {
  CHECK(target_band("L1").target_state == 3);
  CHECK(target_band("L7").target_state == 33);
  CHECK(target_band("L13").target_state == 63);

  const auto levels = all_target_levels();
  REQUIRE(levels.size() == 13);
  for (std::size_t i = 1; i < levels.size(); ++i)
    CHECK(levels[i].target_state > levels[i - 1].target_state);
  for (const auto& level : levels) {
    CHECK(level.target_state >= 0);
    CHECK(level.target_state < kNumStates);
  }

  CHECK_THROWS_AS(target_band("L0"), std::invalid_argument);
  CHECK_THROWS_AS(target_band("L14"), std::invalid_argument);
  CHECK_THROWS_AS(target_band("L99"), std::invalid_argument);
  CHECK_THROWS_AS(target_band("x7"), std::invalid_argument);
  CHECK_THROWS_AS(target_band(""), std::invalid_argument);
}

TEST_CASE("a spike event rises above the reported disturbance peak") {
  EnvModel m = quiet_model(260.0, 800.0);
  DisturbanceEvent spike;
  spike.kind = DisturbanceEvent::Kind::Spike;
  spike.start_step = 10;
  spike.duration_steps = 50;
  spike.magnitude = 390.0;
  m = inject_disturbance(m, spike);

  // The rig had the LED partly on around the recorded disturbances.
  Environment env(m);
  int peak = 0;
  for (long t = 0; t < 80; ++t) peak = std::max(peak, env.step(32).raw);
  CHECK(peak > 650);

  // Back to baseline after the event: contribution ends with the duration.
  CHECK(m.ambient_at(9) == 260.0);
  CHECK(m.ambient_at(60) == 260.0);
  CHECK(m.ambient_at(59) < 260.0 + 0.01 * spike.magnitude + 1.0);
}

TEST_CASE("a zero-magnitude event leaves the ambient profile unchanged") {
  EnvModel m = quiet_model(260.0, 800.0);
  DisturbanceEvent e;
  e.kind = DisturbanceEvent::Kind::Step;
  e.start_step = 0;
  e.duration_steps = 100;
  e.magnitude = 0.0;
  m = inject_disturbance(m, e);
  for (long t = 0; t < 120; ++t) CHECK(m.ambient_at(t) == 260.0);
}

TEST_CASE("a lights-off step clamps the ambient floor at zero") {
  EnvModel m = quiet_model(260.0, 800.0);
  DisturbanceEvent e;
  e.kind = DisturbanceEvent::Kind::Step;
  e.start_step = 5;
  e.duration_steps = 10;
  e.magnitude = -260.0;
  m = inject_disturbance(m, e);
  CHECK(m.ambient_at(4) == 260.0);
  for (long t = 5; t < 15; ++t) CHECK(m.ambient_at(t) == 0.0);
  CHECK(m.ambient_at(15) == 260.0);

  DisturbanceEvent deeper = e;
  deeper.magnitude = -500.0;
  const EnvModel m2 = inject_disturbance(quiet_model(260.0, 800.0), deeper);
  CHECK(m2.ambient_at(7) == 0.0);
}

TEST_CASE("overlapping events sum and composition order does not matter") {
  DisturbanceEvent a;
  a.kind = DisturbanceEvent::Kind::Step;
  a.start_step = 0;
  a.duration_steps = 30;
  a.magnitude = 100.0;
  DisturbanceEvent b;
  b.kind = DisturbanceEvent::Kind::Flicker;
  b.start_step = 10;
  b.duration_steps = 40;
  b.magnitude = 25.0;

  const EnvModel ab = inject_disturbance(inject_disturbance(quiet_model(50.0, 0.0), a), b);
  const EnvModel ba = inject_disturbance(inject_disturbance(quiet_model(50.0, 0.0), b), a);
  for (long t = 0; t < 60; ++t) CHECK(ab.ambient_at(t) == ba.ambient_at(t));
  CHECK(ab.ambient_at(5) == 150.0);
  CHECK(ab.ambient_at(10) == 175.0);  // step plus flicker high phase
  CHECK(ab.ambient_at(11) == 125.0);  // step plus flicker low phase
}

TEST_CASE("flicker alternates sign every step") {
  DisturbanceEvent e;
  e.kind = DisturbanceEvent::Kind::Flicker;
  e.start_step = 0;
  e.duration_steps = 6;
  e.magnitude = 40.0;
  for (long k = 0; k < 6; ++k)
    CHECK(e.contribution(k) == ((k % 2 == 0) ? 40.0 : -40.0));
  CHECK(e.contribution(6) == 0.0);
}

TEST_CASE("seeded noise reproduces trajectories bit for bit") {
  EnvModel m = quiet_model(100.0, 600.0);
  m.sensor_noise_sigma = 4.0;
  m.smoothing_alpha = 0.2;
  m.rng_seed = 77;
  Environment a(m);
  Environment b(m);
  for (int t = 0; t < 200; ++t) {
    const auto ra = a.step(t % 256);
    const auto rb = b.step(t % 256);
    CHECK(ra.raw == rb.raw);
    CHECK(ra.smoothed == rb.smoothed);
  }
}

TEST_CASE("scenario files round-trip through JSON") {
  EnvModel m;
  m.ambient_baseline = 260.0;
  m.led_gain = 900.0;
  m.sensor_noise_sigma = 2.0;
  m.smoothing_alpha = 0.25;
  m.response_lag_steps = 1;
  DisturbanceEvent e;
  e.kind = DisturbanceEvent::Kind::Spike;
  e.start_step = 300;
  e.duration_steps = 50;
  e.magnitude = 420.0;
  m.events.push_back(e);

  const auto j = scenario_to_json(m);
  const EnvModel back = scenario_from_json(j);
  CHECK(back.ambient_baseline == m.ambient_baseline);
  CHECK(back.led_gain == m.led_gain);
  CHECK(back.sensor_noise_sigma == m.sensor_noise_sigma);
  CHECK(back.smoothing_alpha == m.smoothing_alpha);
  CHECK(back.response_lag_steps == m.response_lag_steps);
  REQUIRE(back.events.size() == 1);
  CHECK(back.events[0].kind == DisturbanceEvent::Kind::Spike);
  CHECK(back.events[0].start_step == 300);
  CHECK(back.events[0].magnitude == 420.0);

  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(
                      R"({"events":[{"kind":"wobble","start_step":0,"duration_steps":1,"magnitude":1}]})")),
                  std::invalid_argument);
}

TEST_CASE("model validation rejects bad parameters") {
  EnvModel m;
  m.led_gain = -1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = EnvModel{};
  m.smoothing_alpha = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = EnvModel{};
  DisturbanceEvent e;
  e.duration_steps = 0;
  CHECK_THROWS_AS(inject_disturbance(m, e), std::invalid_argument);
}

TEST_SUITE_END();
