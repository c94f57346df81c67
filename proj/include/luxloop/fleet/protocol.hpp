#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "luxloop/agent.hpp"

namespace luxloop::fleet {

enum class MessageKind { Hello, SetTarget, Telemetry, QsyncPush, QsyncMerged, Bye };

std::string kind_name(MessageKind kind);
MessageKind kind_from_name(const std::string& name);  // throws on unknown kinds

// One wire frame. Encoded as a single newline-terminated JSON object:
// {"kind": "...", "unit": u, "seq": n, "payload": {...}}
struct FleetMessage {
  MessageKind kind = MessageKind::Hello;
  std::uint32_t unit = 0;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const FleetMessage& other) const = default;
};

std::string encode_message(const FleetMessage& msg);          // includes '\n'
FleetMessage decode_message(std::string_view line);           // throws on malformed input

struct TelemetrySnapshot {
  std::uint32_t unit = 0;
  long t = 0;
  double smoothed = 0.0;
  int state = 0;
  int pwm = 0;
  double epsilon = 0.0;
  bool converged = false;

  bool operator==(const TelemetrySnapshot& other) const = default;
};

nlohmann::json telemetry_to_json(const TelemetrySnapshot& snap);
TelemetrySnapshot telemetry_from_json(const nlohmann::json& j, std::uint32_t unit);

// Element-wise mean of the value tables; visit counts are summed. All tables
// must share one shape.
QTable merge_qtables(const std::vector<QTable>& tables);

}  // namespace luxloop::fleet
