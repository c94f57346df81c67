#pragma once

#include <cstdint>
#include <string>

#include "luxloop/fleet/protocol.hpp"
#include "luxloop/trial.hpp"

namespace luxloop::fleet {

struct UnitConfig {
  std::string host = "127.0.0.1";
  int port = 7070;
  std::uint32_t unit_id = 1;
  TrialConfig trial;  // local scenario, agent, seed, and the fallback target
  int telemetry_every = 10;
  int connect_attempts = 3;
  int connect_backoff_ms = 100;  // doubles per retry
  std::size_t send_buffer_cap = 256;
  // After connecting, how long to wait for the brain's target assignment
  // before starting the loop with the local fallback target.
  int handshake_timeout_ms = 1000;
};

struct UnitOutcome {
  EpisodeRecord record;
  bool brain_connected = false;
  TargetLevel final_target;
  std::uint64_t telemetry_sent = 0;
  std::uint64_t telemetry_dropped = 0;  // overflowed send buffer
  std::uint64_t merges_applied = 0;
  std::uint64_t merges_rejected = 0;  // shape mismatches
};

// Runs one edge unit: the standard control loop, fully autonomous when the
// brain is unreachable or goes away. Telemetry is fire-and-forget through a
// bounded buffer drained by a sender thread; the control loop never waits on
// the network. SET_TARGET switches the reward function mid-run; QSYNC_MERGED
// replaces the value table when shapes match.
UnitOutcome unit_run(const UnitConfig& cfg);

}  // namespace luxloop::fleet
