#pragma once

// Streaming detection daemon.
//
// Clients speak newline-delimited JSON (one object per line over TCP, one
// object per text frame over WebSocket). Every object carries a "type":
//
//   client -> server   hello, config, samples, bye
//   server -> client   hello, config, feature, decision, error, ack, bye
//
// A source client pushes samples into a named session; subscribers attach
// to a session and receive the same feature/decision stream. See
// docs/protocol.md for field-level details.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssvep/config.hpp"
#include "ssvep/dataio.hpp"
#include "ssvep/pipeline.hpp"

namespace ssvep::streamd {

inline constexpr int kProtocolVersion = 1;

struct SampleBatch {
  std::uint64_t start{0};
  std::vector<double> values;
  bool resync{false};
};

// Per-session sliding analysis. Not thread-safe; one reader per session.
class SessionState {
 public:
  SessionState(std::string session_id, SessionConfig config,
               std::optional<pipeline::LinearClassifier> classifier = std::nullopt);

  // Appends the batch and returns the events it produced, in window order.
  // A batch whose start counter does not continue the stream yields a single
  // gap error and is dropped; the stream stays stalled until a batch with
  // resync set restarts it at an arbitrary counter.
  std::vector<nlohmann::json> handle_samples(const SampleBatch& batch);

  const SessionConfig& config() const { return config_; }
  const std::string& id() const { return id_; }
  std::size_t window_samples() const { return window_; }
  std::size_t hop_samples() const { return hop_; }
  std::size_t capacity() const { return ring_.size(); }
  std::size_t buffered() const { return count_; }
  std::optional<std::uint64_t> next_counter() const { return expected_; }
  bool stalled() const { return stalled_; }
  bool has_classifier() const { return classifier_.has_value(); }

  // Session settings as announced to clients, including frame schedules.
  nlohmann::json describe() const;

 private:
  void reset_stream(std::uint64_t origin);
  std::vector<double> latest_window() const;

  std::string id_;
  SessionConfig config_;
  std::optional<pipeline::LinearClassifier> classifier_;
  std::vector<double> probes_;
  pipeline::FeatureOptions features_;
  std::size_t window_{0};
  std::size_t hop_{0};

  std::vector<double> ring_;
  std::size_t head_{0};  // next write position
  std::size_t count_{0};

  std::optional<std::uint64_t> expected_;
  bool stalled_{false};
  std::uint64_t origin_{0};
  std::uint64_t window_index_{0};
  pipeline::SlidingSmoother smoother_;
};

// Receives serialized lines (no trailing newline). Must not block.
class Subscriber {
 public:
  virtual ~Subscriber() = default;
  virtual void deliver(const std::string& line) = 0;
};

struct HubOptions {
  SessionConfig config;
  std::optional<pipeline::LinearClassifier> classifier;
};

// Session registry and fan-out. Thread-safe.
class Hub {
 public:
  explicit Hub(HubOptions options);

  struct Session {
    std::mutex mutex;
    std::unique_ptr<SessionState> state;
    std::vector<std::weak_ptr<Subscriber>> subscribers;
    bool has_source{false};
  };

  // Null if another source already owns the session.
  std::shared_ptr<Session> attach_source(const std::string& name);
  void detach_source(const std::string& name);
  std::shared_ptr<Session> subscribe(const std::string& name, const std::shared_ptr<Subscriber>& sub);

  // Serializes and delivers to every live subscriber. Caller holds session.mutex.
  static void publish(Session& session, const nlohmann::json& message);

  SessionConfig default_config() const { return options_.config; }
  const std::optional<pipeline::LinearClassifier>& classifier() const { return options_.classifier; }
  std::unique_ptr<SessionState> make_state(const std::string& name, const SessionConfig& config) const;

 private:
  std::shared_ptr<Session> get_or_create(const std::string& name);

  HubOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// Transport-independent per-connection protocol state machine.
class Connection : public Subscriber, public std::enable_shared_from_this<Connection> {
 public:
  using Sink = std::function<void(const std::string&)>;
  using Logger = std::function<void(const std::string&)>;

  Connection(Hub& hub, Sink sink, Logger warn = {});
  ~Connection() override;

  void deliver(const std::string& line) override;
  // Processes one incoming line. Returns false once the peer said bye.
  bool on_line(const std::string& line);
  void on_close();

 private:
  void send(const nlohmann::json& message);
  void become_source(const std::string& name);
  void handle_samples(const nlohmann::json& message);
  void handle_config(const nlohmann::json& message);

  Hub& hub_;
  Sink sink_;
  Logger warn_;
  enum class Role { None, Source, Subscriber } role_{Role::None};
  std::string session_name_;
  std::shared_ptr<Hub::Session> session_;
  bool closed_{false};
};

struct Endpoint {
  std::string host{"127.0.0.1"};
  std::uint16_t port{0};
};

// Parses "host:port" (or ":port"). Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);

struct ServerOptions {
  Endpoint tcp{"127.0.0.1", 7878};
  std::optional<Endpoint> websocket;
  std::size_t threads{2};
};

// TCP newline-JSON listener plus optional WebSocket listener sharing one Hub.
class Server {
 public:
  Server(ServerOptions options, Hub& hub);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting on background threads. Throws
  // std::runtime_error when a port cannot be bound.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::uint16_t tcp_port() const;
  std::optional<std::uint16_t> websocket_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Batches of a dataset's samples in trial order with a continuous counter.
class ReplaySource {
 public:
  ReplaySource(const dataio::Dataset& dataset, std::size_t batch_size = 32,
               std::optional<std::string> trial_id = std::nullopt);

  std::optional<SampleBatch> next();
  std::size_t total_batches() const;
  double fs() const { return fs_; }
  std::size_t batch_size() const { return batch_; }

 private:
  std::vector<double> samples_;
  double fs_;
  std::size_t batch_;
  std::size_t pos_{0};
};

struct ReplayOptions {
  std::size_t batch_size{32};
  bool realtime{false};
  std::string session{"replay"};
  std::optional<std::string> trial_id;
  std::optional<SessionConfig> config;  // sent before streaming when set
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
};

struct ReplayResult {
  std::vector<nlohmann::json> events;  // feature / decision / error, in arrival order
  std::size_t batches{0};
  double elapsed_s{0.0};
};

// Streams a dataset to a running daemon over TCP and collects the events it
// sends back. Every batch waits for its ack, so events are complete when
// this returns. Each event line is also written to log when given.
ReplayResult replay_to_server(const Endpoint& server, const dataio::Dataset& dataset,
                              const ReplayOptions& options, std::ostream* log = nullptr);

// Same stream fed straight into a SessionState, no transport.
std::vector<nlohmann::json> replay_in_process(const dataio::Dataset& dataset, const SessionConfig& config,
                                              const std::optional<pipeline::LinearClassifier>& classifier,
                                              const ReplayOptions& options);

}  // namespace ssvep::streamd
