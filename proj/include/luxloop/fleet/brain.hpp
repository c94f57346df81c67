#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "luxloop/agent.hpp"
#include "luxloop/fleet/protocol.hpp"
#include "luxloop/fleet/socket.hpp"

namespace luxloop::fleet {

struct BrainConfig {
  std::string host = "127.0.0.1";
  int port = 7070;  // 0 binds an ephemeral port
  std::string default_target = "L7";
  std::map<std::uint32_t, std::string> unit_targets;  // per-unit overrides
  // Units push their tables every this many control steps; pushes trigger a
  // fleet-wide element-wise merge broadcast. 0 disables merging entirely.
  long merge_every = 0;
  std::string telemetry_log;  // optional NDJSON append target
  int expect_units = 0;       // wait() returns after this many BYEs (0 = until stop)
};

// Central coordinator: answers HELLO with the unit's target, ingests
// telemetry into an in-memory store (connection handlers enqueue, a single
// aggregator thread consumes), and optionally merges pushed value tables.
class Brain {
 public:
  explicit Brain(BrainConfig cfg);
  ~Brain();

  Brain(const Brain&) = delete;
  Brain& operator=(const Brain&) = delete;

  bool start();  // false when the address cannot be bound
  void stop();
  void wait();

  int port() const { return port_; }

  std::size_t telemetry_count() const;
  std::vector<TelemetrySnapshot> telemetry() const;
  std::uint64_t seq_regressions() const;
  std::uint64_t merges_performed() const;
  std::optional<QTable> last_merged() const;
  int units_finished() const;

 private:
  struct Connection {
    TcpStream stream;
    std::mutex write_mutex;
    std::uint64_t out_seq = 0;  // per-connection, strictly increasing
    std::uint32_t unit = 0;
    bool greeted = false;
  };

  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);
  void aggregate_loop();
  bool handle_message(const std::shared_ptr<Connection>& conn, const FleetMessage& msg);
  void maybe_merge_and_broadcast();
  void send_to(const std::shared_ptr<Connection>& conn, const FleetMessage& msg);
  std::string target_for(std::uint32_t unit) const;

  BrainConfig cfg_;
  TcpListener listener_;
  int port_ = 0;

  std::thread accept_thread_;
  std::vector<std::thread> handlers_;
  std::thread aggregator_;

  mutable std::mutex state_mutex_;
  std::condition_variable done_cv_;
  bool stopping_ = false;
  int byes_ = 0;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::map<std::uint32_t, std::uint64_t> last_seq_;
  std::uint64_t seq_regressions_ = 0;
  std::map<std::uint32_t, QTable> pushed_tables_;
  long steps_since_merge_ = 0;
  std::uint64_t merges_ = 0;
  std::optional<QTable> last_merged_;

  mutable std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::vector<TelemetrySnapshot> queue_;
  bool queue_closed_ = false;

  mutable std::mutex store_mutex_;
  std::vector<TelemetrySnapshot> store_;
};

}  // namespace luxloop::fleet
