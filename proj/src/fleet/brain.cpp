#include "luxloop/fleet/brain.hpp"

#include <cstdio>
#include <fstream>

namespace luxloop::fleet {

Brain::Brain(BrainConfig cfg) : cfg_(std::move(cfg)) {}

Brain::~Brain() { stop(); }

bool Brain::start() {
  auto listener = TcpListener::bind(cfg_.host, cfg_.port);
  if (!listener) return false;
  listener_ = std::move(*listener);
  port_ = listener_.port();
  aggregator_ = std::thread(&Brain::aggregate_loop, this);
  accept_thread_ = std::thread(&Brain::accept_loop, this);
  return true;
}

void Brain::stop() {
  {
    std::lock_guard lock(state_mutex_);
    if (stopping_) {
      done_cv_.notify_all();
    }
    stopping_ = true;
    for (auto& conn : connections_) conn->stream.shutdown_both();
  }
  listener_.close();
  done_cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& h : handlers_)
    if (h.joinable()) h.join();
  handlers_.clear();
  {
    std::lock_guard lock(queue_mutex_);
    queue_closed_ = true;
  }
  queue_cv_.notify_all();
  if (aggregator_.joinable()) aggregator_.join();
}

void Brain::wait() {
  std::unique_lock lock(state_mutex_);
  done_cv_.wait(lock, [&] {
    return stopping_ || (cfg_.expect_units > 0 && byes_ >= cfg_.expect_units);
  });
}

std::size_t Brain::telemetry_count() const {
  std::lock_guard lock(store_mutex_);
  return store_.size();
}

std::vector<TelemetrySnapshot> Brain::telemetry() const {
  std::lock_guard lock(store_mutex_);
  return store_;
}

std::uint64_t Brain::seq_regressions() const {
  std::lock_guard lock(state_mutex_);
  return seq_regressions_;
}

std::uint64_t Brain::merges_performed() const {
  std::lock_guard lock(state_mutex_);
  return merges_;
}

std::optional<QTable> Brain::last_merged() const {
  std::lock_guard lock(state_mutex_);
  return last_merged_;
}

int Brain::units_finished() const {
  std::lock_guard lock(state_mutex_);
  return byes_;
}

void Brain::accept_loop() {
  while (true) {
    auto stream = listener_.accept();
    if (!stream) return;  // listener closed
    auto conn = std::make_shared<Connection>();
    conn->stream = std::move(*stream);
    {
      std::lock_guard lock(state_mutex_);
      if (stopping_) return;
      connections_.push_back(conn);
      handlers_.emplace_back(&Brain::serve_connection, this, conn);
    }
  }
}

std::string Brain::target_for(std::uint32_t unit) const {
  const auto it = cfg_.unit_targets.find(unit);
  return it != cfg_.unit_targets.end() ? it->second : cfg_.default_target;
}

void Brain::send_to(const std::shared_ptr<Connection>& conn, const FleetMessage& msg) {
  std::lock_guard lock(conn->write_mutex);
  FleetMessage stamped = msg;
  stamped.seq = ++conn->out_seq;
  conn->stream.write_all(encode_message(stamped));
}

void Brain::serve_connection(std::shared_ptr<Connection> conn) {
  while (true) {
    auto line = conn->stream.read_line();
    if (!line) return;
    if (line->empty()) continue;
    FleetMessage msg;
    try {
      msg = decode_message(*line);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[brain] dropping connection: %s\n", e.what());
      conn->stream.shutdown_both();
      return;
    }
    if (!handle_message(conn, msg)) return;
  }
}

bool Brain::handle_message(const std::shared_ptr<Connection>& conn,
                           const FleetMessage& msg) {
  {
    std::lock_guard lock(state_mutex_);
    auto [it, inserted] = last_seq_.try_emplace(msg.unit, msg.seq);
    if (!inserted) {
      if (msg.seq <= it->second) {
        ++seq_regressions_;
        return true;  // discard, keep the connection
      }
      it->second = msg.seq;
    }
  }

  switch (msg.kind) {
    case MessageKind::Hello: {
      conn->unit = msg.unit;
      conn->greeted = true;
      FleetMessage reply;
      reply.kind = MessageKind::SetTarget;
      reply.unit = msg.unit;
      reply.seq = 1;
      reply.payload = {{"target", target_for(msg.unit)}, {"qsync_every", cfg_.merge_every}};
      send_to(conn, reply);
      return true;
    }
    case MessageKind::Telemetry: {
      TelemetrySnapshot snap;
      try {
        snap = telemetry_from_json(msg.payload, msg.unit);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[brain] dropping connection: bad telemetry: %s\n", e.what());
        conn->stream.shutdown_both();
        return false;
      }
      {
        std::lock_guard lock(queue_mutex_);
        queue_.push_back(snap);
      }
      queue_cv_.notify_one();
      return true;
    }
    case MessageKind::QsyncPush: {
      if (cfg_.merge_every <= 0) return true;  // merging disabled
      QTable table;
      try {
        table = qtable_from_json(msg.payload);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[brain] rejecting table push from unit %u: %s\n", msg.unit,
                     e.what());
        return true;
      }
      {
        std::lock_guard lock(state_mutex_);
        pushed_tables_.insert_or_assign(msg.unit, std::move(table));
      }
      maybe_merge_and_broadcast();
      return true;
    }
    case MessageKind::Bye: {
      {
        std::lock_guard lock(state_mutex_);
        ++byes_;
      }
      done_cv_.notify_all();
      return false;
    }
    case MessageKind::SetTarget:
    case MessageKind::QsyncMerged:
      // Brain-originated kinds arriving inbound are protocol misuse.
      std::fprintf(stderr, "[brain] dropping connection: unexpected %s from unit %u\n",
                   kind_name(msg.kind).c_str(), msg.unit);
      conn->stream.shutdown_both();
      return false;
  }
  return true;
}

void Brain::maybe_merge_and_broadcast() {
  std::vector<QTable> tables;
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(state_mutex_);
    for (const auto& [unit, table] : pushed_tables_) tables.push_back(table);
    conns = connections_;
  }
  if (tables.empty()) return;

  QTable merged;
  try {
    merged = merge_qtables(tables);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[brain] merge skipped: %s\n", e.what());
    return;
  }

  AgentConfig cfg;  // wire format carries the table; config fields are placeholders
  FleetMessage broadcast;
  broadcast.kind = MessageKind::QsyncMerged;
  broadcast.unit = 0;
  broadcast.payload = qtable_to_json(merged, cfg);
  {
    std::lock_guard lock(state_mutex_);
    ++merges_;
    last_merged_ = merged;
    broadcast.seq = merges_;
  }
  for (const auto& conn : conns) {
    if (conn->greeted) send_to(conn, broadcast);
  }
}

void Brain::aggregate_loop() {
  std::ofstream log;
  if (!cfg_.telemetry_log.empty()) log.open(cfg_.telemetry_log, std::ios::app);
  while (true) {
    std::vector<TelemetrySnapshot> batch;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return queue_closed_ || !queue_.empty(); });
      if (queue_.empty() && queue_closed_) return;
      batch.swap(queue_);
    }
    {
      std::lock_guard lock(store_mutex_);
      store_.insert(store_.end(), batch.begin(), batch.end());
    }
    if (log.is_open()) {
      for (const auto& snap : batch) {
        nlohmann::ordered_json j;
        j["unit"] = snap.unit;
        j["t"] = snap.t;
        j["smoothed"] = snap.smoothed;
        j["state"] = snap.state;
        j["pwm"] = snap.pwm;
        j["epsilon"] = snap.epsilon;
        j["converged"] = snap.converged;
        log << j.dump() << '\n';
      }
      log.flush();
    }
  }
}

}  // namespace luxloop::fleet
