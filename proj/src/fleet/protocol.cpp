#include "luxloop/fleet/protocol.hpp"

#include <stdexcept>

namespace luxloop::fleet {

std::string kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::Hello: return "HELLO";
    case MessageKind::SetTarget: return "SET_TARGET";
    case MessageKind::Telemetry: return "TELEMETRY";
    case MessageKind::QsyncPush: return "QSYNC_PUSH";
    case MessageKind::QsyncMerged: return "QSYNC_MERGED";
    case MessageKind::Bye: return "BYE";
  }
  return "HELLO";
}

MessageKind kind_from_name(const std::string& name) {
  if (name == "HELLO") return MessageKind::Hello;
  if (name == "SET_TARGET") return MessageKind::SetTarget;
  if (name == "TELEMETRY") return MessageKind::Telemetry;
  if (name == "QSYNC_PUSH") return MessageKind::QsyncPush;
  if (name == "QSYNC_MERGED") return MessageKind::QsyncMerged;
  if (name == "BYE") return MessageKind::Bye;
  throw std::invalid_argument("unknown message kind '" + name + "'");
}

std::string encode_message(const FleetMessage& msg) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(msg.kind);
  j["unit"] = msg.unit;
  j["seq"] = msg.seq;
  j["payload"] = msg.payload;
  return j.dump() + "\n";
}

FleetMessage decode_message(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("message is not a JSON object");
  for (const char* field : {"kind", "unit", "seq", "payload"}) {
    if (!j.contains(field))
      throw std::invalid_argument(std::string("message missing field '") + field + "'");
  }
  FleetMessage msg;
  msg.kind = kind_from_name(j.at("kind").get<std::string>());
  msg.unit = j.at("unit").get<std::uint32_t>();
  msg.seq = j.at("seq").get<std::uint64_t>();
  msg.payload = j.at("payload");
  if (!msg.payload.is_object())
    throw std::invalid_argument("message payload must be an object");
  return msg;
}

nlohmann::json telemetry_to_json(const TelemetrySnapshot& snap) {
  nlohmann::json j;
  j["t"] = snap.t;
  j["smoothed"] = snap.smoothed;
  j["state"] = snap.state;
  j["pwm"] = snap.pwm;
  j["epsilon"] = snap.epsilon;
  j["converged"] = snap.converged;
  return j;
}

TelemetrySnapshot telemetry_from_json(const nlohmann::json& j, std::uint32_t unit) {
  TelemetrySnapshot snap;
  snap.unit = unit;
  snap.t = j.at("t").get<long>();
  snap.smoothed = j.at("smoothed").get<double>();
  snap.state = j.at("state").get<int>();
  snap.pwm = j.at("pwm").get<int>();
  snap.epsilon = j.at("epsilon").get<double>();
  snap.converged = j.at("converged").get<bool>();
  return snap;
}

QTable merge_qtables(const std::vector<QTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("merge of zero tables");
  const QTable& first = tables.front();
  for (const auto& t : tables)
    if (!t.same_shape(first))
      throw std::invalid_argument("merge of tables with mismatched shapes");

  QTable merged(first.num_states(), first.num_actions());
  const double n = static_cast<double>(tables.size());
  auto& values = merged.mutable_values();
  auto& visits = merged.mutable_visit_counts();
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] += t.values()[i];
      visits[i] += t.visit_counts()[i];
    }
  }
  for (auto& v : values) v /= n;
  return merged;
}

}  // namespace luxloop::fleet
