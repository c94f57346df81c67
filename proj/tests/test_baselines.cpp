#include <random>

#include "doctest.h"
#include "luxloop/baselines.hpp"
#include "luxloop/trial.hpp"

using namespace luxloop;

namespace {

// Ambient alone sits at the center of L4's bin; the lights can stay off.
EnvModel sunny_scenario() {
  EnvModel m;
  m.ambient_baseline = 296.0;
  m.led_gain = 1275.0;
  m.sensor_noise_sigma = 2.0;
  return m;
}

QTable train_greedy_table(const TargetLevel& target, const EnvModel& scenario,
                          std::uint64_t seed) {
  TrialConfig cfg;
  cfg.target = target;
  cfg.scenario = scenario;
  cfg.seed = seed;
  QTable table(kNumStates, cfg.agent.num_actions());
  double epsilon = cfg.agent.epsilon_initial;
  for (int episode = 0; episode < 4; ++episode) {
    cfg.seed = seed + episode;
    run_trial(cfg, table, epsilon);
  }
  return table;
}

}  // namespace

TEST_SUITE_BEGIN("baselines");

TEST_CASE("the open-loop controller ignores time and feedback") {
  for (long t : {0L, 5L, 5000L}) {
    CHECK(open_loop_controller(OpenLoopConfig{255}, t) == 255);
    CHECK(open_loop_controller(OpenLoopConfig{128}, t) == 128);
  }
}

TEST_CASE("the closed-loop controller nudges toward the band") {
  const TargetLevel target = target_band("L13");  // center 1016
  const ClosedLoopConfig cfg{8.0, 8};

  CHECK(closed_loop_controller(1016.0, target, cfg, 130) == 130);  // inside band
  CHECK(closed_loop_controller(0.0, target, cfg, 0) == 8);         // below: up
  CHECK(closed_loop_controller(0.0, target, cfg, 252) == 255);     // clamped

  const TargetLevel low = target_band("L1");  // center 56
  CHECK(closed_loop_controller(1023.0, low, cfg, 255) == 247);  // above: down
  CHECK(closed_loop_controller(1023.0, low, cfg, 4) == 0);      // clamped
}

TEST_CASE("the closed-loop controller never moves faster than its step") {
  const TargetLevel target = target_band("L7");
  const ClosedLoopConfig cfg{8.0, 8};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> level(0.0, 1023.0);
  int pwm = 128;
  for (int i = 0; i < 2000; ++i) {
    const int next = closed_loop_controller(level(rng), target, cfg, pwm);
    CHECK(std::abs(next - pwm) <= cfg.step);
    pwm = next;
  }
}

TEST_CASE("energy accounting averages duty against full brightness") {
  const std::vector<int> full(100, 255);
  EnergyEntry e = energy_account(full, 6.0);
  CHECK(e.consumed_watts == 6.0);
  CHECK(e.saved_watts == 0.0);

  const std::vector<int> dark(50, 0);
  e = energy_account(dark, 6.0);
  CHECK(e.consumed_watts == 0.0);
  CHECK(e.saved_watts == 6.0);

  std::vector<int> alternating;
  for (int i = 0; i < 100; ++i) alternating.push_back(i % 2 == 0 ? 0 : 255);
  e = energy_account(alternating, 6.0);
  CHECK(e.consumed_watts == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e.saved_watts == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(energy_account(std::vector<int>{}, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(energy_account(full, 0.0), std::invalid_argument);
}

TEST_CASE("consumed plus saved is exactly the reference power") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> duty(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> trace(257);
    for (auto& d : trace) d = duty(rng);
    const EnergyEntry e = energy_account(trace, 6.0);
    CHECK(e.consumed_watts + e.saved_watts == 6.0);
    CHECK(e.consumed_watts >= 0.0);
  }
}

TEST_CASE("controller comparison on a sunny scenario orders energy use") {
  const TargetLevel target = target_band("L4");
  const EnvModel scenario = sunny_scenario();
  const QTable trained = train_greedy_table(target, scenario, 300);

  CompareConfig cfg;
  cfg.duration_steps = 1500;
  cfg.env_seed = 42;
  const EnergyReport report =
      compare_controllers(target, scenario, trained, kDefaultActionDeltas, cfg);

  REQUIRE(report.entries.size() == 3);
  const EnergyEntry& rl = report.entries[0];
  const EnergyEntry& open = report.entries[1];
  const EnergyEntry& closed = report.entries[2];
  CHECK(rl.controller == "rl");
  CHECK(open.controller == "open_loop");
  CHECK(closed.controller == "closed_loop");

  CHECK(open.consumed_watts == 6.0);
  CHECK(open.saved_watts == 0.0);
  CHECK(rl.consumed_watts <= closed.consumed_watts);
  CHECK(closed.consumed_watts <= open.consumed_watts);
  for (const auto& e : report.entries)
    CHECK(e.consumed_watts + e.saved_watts == report.p_max);
}

TEST_CASE("with a dead LED all controllers see the same state error") {
  EnvModel scenario;
  scenario.ambient_baseline = 296.0;
  scenario.led_gain = 0.0;
  scenario.sensor_noise_sigma = 0.0;
  const TargetLevel target = target_band("L4");
  const QTable untrained(kNumStates, 5);

  CompareConfig cfg;
  cfg.duration_steps = 200;
  const EnergyReport report =
      compare_controllers(target, scenario, untrained, kDefaultActionDeltas, cfg);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].mean_abs_state_error == report.entries[1].mean_abs_state_error);
  CHECK(report.entries[1].mean_abs_state_error == report.entries[2].mean_abs_state_error);
}

TEST_CASE("the comparison is deterministic for a fixed environment seed") {
  const TargetLevel target = target_band("L4");
  const EnvModel scenario = sunny_scenario();
  const QTable trained = train_greedy_table(target, scenario, 301);

  CompareConfig cfg;
  cfg.duration_steps = 400;
  cfg.env_seed = 9;
  const auto a = compare_controllers(target, scenario, trained, kDefaultActionDeltas, cfg);
  const auto b = compare_controllers(target, scenario, trained, kDefaultActionDeltas, cfg);
  CHECK(energy_report_to_json(a).dump() == energy_report_to_json(b).dump());
}

TEST_CASE("a subset of controllers yields a smaller report") {
  const TargetLevel target = target_band("L4");
  CompareConfig cfg;
  cfg.duration_steps = 50;
  cfg.controllers = {ControllerKind::OpenLoop};
  const QTable untrained(kNumStates, 5);
  const EnergyReport report = compare_controllers(target, sunny_scenario(), untrained,
                                                  kDefaultActionDeltas, cfg);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].controller == "open_loop");

  const std::string csv = energy_report_csv(report);
  CHECK(csv.rfind("controller,consumed_watts,saved_watts,mean_abs_state_error\n", 0) == 0);
  CHECK(csv.find("open_loop,") != std::string::npos);
}

TEST_SUITE_END();
