#include "luxloop/fleet/unit.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>

#include "luxloop/fleet/socket.hpp"

namespace luxloop::fleet {

namespace {

using Clock = std::chrono::steady_clock;

// Outgoing side: bounded fire-and-forget queue plus one sender thread. When
// the buffer is full the oldest snapshot is dropped and counted; enqueue never
// blocks the control loop.
class Sender {
 public:
  Sender(TcpStream* stream, std::size_t cap) : stream_(stream), cap_(cap) {
    thread_ = std::thread(&Sender::run, this);
  }

  ~Sender() { stop(); }

  void enqueue(std::string line) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      if (queue_.size() >= cap_) {
        queue_.pop_front();
        ++dropped_;
      }
      queue_.push_back(std::move(line));
    }
    cv_.notify_one();
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  std::uint64_t sent() const {
    std::lock_guard lock(mutex_);
    return sent_;
  }
  std::uint64_t dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
  }

 private:
  void run() {
    while (true) {
      std::string line;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) return;  // closed and drained
        line = std::move(queue_.front());
        queue_.pop_front();
      }
      if (stream_->write_all(line)) {
        std::lock_guard lock(mutex_);
        ++sent_;
      }
    }
  }

  TcpStream* stream_;
  std::size_t cap_;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool closed_ = false;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
};

// Incoming side: one thread reading lines into an inbox the control loop
// polls between steps.
class Receiver {
 public:
  explicit Receiver(TcpStream* stream) : stream_(stream) {
    thread_ = std::thread(&Receiver::run, this);
  }

  ~Receiver() {
    stream_->shutdown_both();
    if (thread_.joinable()) thread_.join();
  }

  std::vector<FleetMessage> drain() {
    std::lock_guard lock(mutex_);
    std::vector<FleetMessage> out;
    out.swap(inbox_);
    return out;
  }

  bool wait_for_message(int timeout_ms) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                        [&] { return !inbox_.empty() || eof_; }) &&
           !inbox_.empty();
  }

 private:
  void run() {
    while (true) {
      auto line = stream_->read_line();
      if (!line) break;
      if (line->empty()) continue;
      try {
        FleetMessage msg = decode_message(*line);
        {
          std::lock_guard lock(mutex_);
          inbox_.push_back(std::move(msg));
        }
        cv_.notify_all();
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[unit] ignoring malformed message: %s\n", e.what());
      }
    }
    {
      std::lock_guard lock(mutex_);
      eof_ = true;
    }
    cv_.notify_all();
  }

  TcpStream* stream_;
  std::thread thread_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<FleetMessage> inbox_;
  bool eof_ = false;
};

std::optional<TcpStream> connect_with_backoff(const UnitConfig& cfg) {
  int backoff = cfg.connect_backoff_ms;
  for (int attempt = 0; attempt < cfg.connect_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    auto stream = TcpStream::connect(cfg.host, cfg.port);
    if (stream) return stream;
  }
  return std::nullopt;
}

}  // namespace

UnitOutcome unit_run(const UnitConfig& cfg) {
  cfg.trial.validate();
  if (cfg.telemetry_every < 1)
    throw std::invalid_argument("telemetry_every must be >= 1");

  UnitOutcome outcome;
  TrialConfig trial = cfg.trial;

  std::optional<TcpStream> stream = connect_with_backoff(cfg);
  std::optional<Receiver> receiver;
  std::optional<Sender> sender;
  std::uint64_t seq = 0;

  if (stream) {
    outcome.brain_connected = true;
    receiver.emplace(&*stream);
    sender.emplace(&*stream, cfg.send_buffer_cap);

    FleetMessage hello;
    hello.kind = MessageKind::Hello;
    hello.unit = cfg.unit_id;
    hello.seq = ++seq;
    stream->write_all(encode_message(hello));

    // The initial target assignment is worth a short wait; afterwards the
    // loop never blocks on the brain.
    receiver->wait_for_message(cfg.handshake_timeout_ms);
  } else {
    std::fprintf(stderr, "[unit %u] brain unreachable, running standalone\n",
                 cfg.unit_id);
  }

  const auto apply_inbox = [&](ControlSession& session) {
    if (!receiver) return;
    for (const FleetMessage& msg : receiver->drain()) {
      switch (msg.kind) {
        case MessageKind::SetTarget:
          try {
            const TargetLevel target =
                target_band(msg.payload.at("target").get<std::string>());
            session.set_target(target);
            outcome.final_target = target;
          } catch (const std::exception& e) {
            std::fprintf(stderr, "[unit %u] bad SET_TARGET: %s\n", cfg.unit_id, e.what());
          }
          break;
        case MessageKind::QsyncMerged:
          try {
            const QTable merged = qtable_from_json(msg.payload);
            if (session.replace_table(merged)) {
              ++outcome.merges_applied;
            } else {
              ++outcome.merges_rejected;
              std::fprintf(stderr, "[unit %u] rejected merged table with foreign shape\n",
                           cfg.unit_id);
            }
          } catch (const std::exception& e) {
            std::fprintf(stderr, "[unit %u] bad QSYNC_MERGED: %s\n", cfg.unit_id, e.what());
            ++outcome.merges_rejected;
          }
          break;
        default:
          break;  // nothing else flows brain -> unit
      }
    }
  };

  const auto start = Clock::now();
  ControlSession session(trial);
  outcome.final_target = trial.target;

  long qsync_every = 0;
  if (receiver) {
    // Apply any handshake messages (usually the SET_TARGET reply) before the
    // first step; the qsync cadence rides along in the payload.
    for (const FleetMessage& msg : receiver->drain()) {
      if (msg.kind == MessageKind::SetTarget) {
        try {
          const TargetLevel target =
              target_band(msg.payload.at("target").get<std::string>());
          session.set_target(target);
          outcome.final_target = target;
          qsync_every = msg.payload.value("qsync_every", 0L);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[unit %u] bad SET_TARGET: %s\n", cfg.unit_id, e.what());
        }
      }
    }
  }

  std::uint64_t telemetry_enqueued = 0;
  while (!session.done()) {
    apply_inbox(session);
    const StepRow row = session.step();

    if (sender && row.t % cfg.telemetry_every == 0) {
      ++telemetry_enqueued;
      TelemetrySnapshot snap;
      snap.unit = cfg.unit_id;
      snap.t = row.t;
      snap.smoothed = row.smoothed;
      snap.state = row.state;
      snap.pwm = row.pwm;
      snap.epsilon = row.epsilon;
      snap.converged = session.converged();
      FleetMessage msg;
      msg.kind = MessageKind::Telemetry;
      msg.unit = cfg.unit_id;
      msg.seq = ++seq;
      msg.payload = telemetry_to_json(snap);
      sender->enqueue(encode_message(msg));
    }

    if (sender && qsync_every > 0 && row.t % qsync_every == 0) {
      FleetMessage msg;
      msg.kind = MessageKind::QsyncPush;
      msg.unit = cfg.unit_id;
      msg.seq = ++seq;
      msg.payload = qtable_to_json(session.table(), trial.agent);
      sender->enqueue(encode_message(msg));
    }
  }
  const auto stop = Clock::now();

  if (sender) {
    FleetMessage bye;
    bye.kind = MessageKind::Bye;
    bye.unit = cfg.unit_id;
    bye.seq = ++seq;
    sender->enqueue(encode_message(bye));
    sender->stop();  // drains the queue, including the BYE
    outcome.telemetry_sent = telemetry_enqueued;
    outcome.telemetry_dropped = sender->dropped();
  }

  outcome.record = session.take_record();
  outcome.record.wall_time_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  return outcome;
}

}  // namespace luxloop::fleet
