#include <stdexcept>
#include <sys/socket.h>
#include <sys/time.h>

#include <boost/asio.hpp>

#include "ssvep/streamd.hpp"

namespace ssvep::streamd {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using nlohmann::json;

ReplaySource::ReplaySource(const dataio::Dataset& dataset, std::size_t batch_size,
                           std::optional<std::string> trial_id)
    : fs_(dataset.fs), batch_(batch_size) {
  if (batch_size < 1) throw std::invalid_argument("replay: batch size must be >= 1");
  bool found = false;
  for (const auto& trial : dataset.trials) {
    if (trial_id && trial.entry.trial_id != *trial_id) continue;
    found = true;
    samples_.insert(samples_.end(), trial.signal.samples.begin(), trial.signal.samples.end());
  }
  if (trial_id && !found) throw std::invalid_argument("replay: no trial '" + *trial_id + "' in dataset");
  if (samples_.empty()) throw std::invalid_argument("replay: dataset has no samples");
}

std::size_t ReplaySource::total_batches() const { return (samples_.size() + batch_ - 1) / batch_; }

std::optional<SampleBatch> ReplaySource::next() {
  if (pos_ >= samples_.size()) return std::nullopt;
  const std::size_t end = std::min(samples_.size(), pos_ + batch_);
  SampleBatch b;
  b.start = pos_;
  b.values.assign(samples_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  samples_.begin() + static_cast<std::ptrdiff_t>(end));
  pos_ = end;
  return b;
}

namespace {

class LineClient {
 public:
  LineClient(const Endpoint& server, std::chrono::milliseconds timeout) : socket_(ioc_) {
    tcp::resolver resolver(ioc_);
    boost::system::error_code ec;
    const auto results = resolver.resolve(server.host, std::to_string(server.port), ec);
    if (!ec) asio::connect(socket_, results, ec);
    if (ec) {
      throw std::runtime_error("replay: cannot connect to " + server.host + ":" + std::to_string(server.port) +
                               ": " + ec.message());
    }
    socket_.set_option(tcp::no_delay(true));
    timeval tv{};
    tv.tv_sec = static_cast<long>(timeout.count() / 1000);
    tv.tv_usec = static_cast<long>((timeout.count() % 1000) * 1000);
    ::setsockopt(socket_.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }

  void send(const json& message) { asio::write(socket_, asio::buffer(message.dump() + "\n")); }

  std::string read_line() {
    boost::system::error_code ec;
    const std::size_t n = asio::read_until(socket_, buffer_, '\n', ec);
    if (ec) {
      if (ec == asio::error::would_block || ec == asio::error::try_again || ec == asio::error::timed_out) {
        throw std::runtime_error("replay: timed out waiting for the server");
      }
      throw std::runtime_error("replay: connection lost: " + ec.message());
    }
    std::string line(asio::buffers_begin(buffer_.data()),
                     asio::buffers_begin(buffer_.data()) + static_cast<std::ptrdiff_t>(n) - 1);
    buffer_.consume(n);
    return line;
  }

 private:
  asio::io_context ioc_;
  tcp::socket socket_;
  asio::streambuf buffer_;
};

bool is_event(const std::string& type) { return type == "feature" || type == "decision" || type == "error"; }

}  // namespace

ReplayResult replay_to_server(const Endpoint& server, const dataio::Dataset& dataset,
                              const ReplayOptions& options, std::ostream* log) {
  ReplaySource source(dataset, options.batch_size, options.trial_id);
  LineClient client(server, options.timeout);
  ReplayResult result;

  // Reads until a message of the wanted type; events seen on the way are kept.
  auto read_until_type = [&](const std::string& wanted) {
    for (;;) {
      const std::string line = client.read_line();
      json message = json::parse(line);
      const std::string type = message.value("type", std::string());
      if (type == wanted) return message;
      if (type == "error" && message.value("code", std::string()) != "gap" &&
          message.value("code", std::string()) != "numerical") {
        throw std::runtime_error("replay: server error: " + message.value("message", std::string("?")));
      }
      if (is_event(type)) {
        if (log) *log << line << '\n';
        result.events.push_back(std::move(message));
      }
    }
  };

  client.send(json{{"type", "hello"}, {"role", "source"}, {"session", options.session}, {"version", kProtocolVersion}});
  read_until_type("hello");
  read_until_type("config");
  if (options.config) {
    client.send(json{{"type", "config"}, {"config", *options.config}});
    read_until_type("config");
  }

  const auto t_start = std::chrono::steady_clock::now();
  while (auto batch = source.next()) {
    if (options.realtime) {
      // a batch exists once its last sample has been "acquired"
      const double due = static_cast<double>(batch->start + batch->values.size()) / source.fs();
      std::this_thread::sleep_until(t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                  std::chrono::duration<double>(due)));
    }
    client.send(json{{"type", "samples"}, {"start", batch->start}, {"values", batch->values}});
    read_until_type("ack");
    ++result.batches;
  }
  result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  client.send(json{{"type", "bye"}});
  read_until_type("bye");
  if (log) log->flush();
  return result;
}

std::vector<json> replay_in_process(const dataio::Dataset& dataset, const SessionConfig& config,
                                    const std::optional<pipeline::LinearClassifier>& classifier,
                                    const ReplayOptions& options) {
  ReplaySource source(dataset, options.batch_size, options.trial_id);
  SessionState state(options.session, config, classifier);
  std::vector<json> events;
  while (auto batch = source.next()) {
    for (auto& e : state.handle_samples(*batch)) events.push_back(std::move(e));
  }
  return events;
}

}  // namespace ssvep::streamd
