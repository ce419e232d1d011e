#include <condition_variable>
#include <deque>
#include <iostream>
#include <stdexcept>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "ssvep/streamd.hpp"

namespace ssvep::streamd {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxLine = 16u << 20;

void log_warning(const std::string& text) { std::cerr << "streamd: " << text << '\n'; }

// Newline-delimited JSON over a plain TCP socket.
class TcpPeer : public std::enable_shared_from_this<TcpPeer> {
 public:
  TcpPeer(tcp::socket socket, Hub& hub) : socket_(std::move(socket)), buffer_(kMaxLine), hub_(hub) {}

  void start() {
    std::weak_ptr<TcpPeer> weak = weak_from_this();
    conn_ = std::make_shared<Connection>(
        hub_, [weak](const std::string& line) {
          if (auto self = weak.lock()) self->queue(line);
        },
        log_warning);
    read();
  }

 private:
  void read() {
    asio::async_read_until(socket_, buffer_, '\n',
                           [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                             self->on_read(ec, n);
                           });
  }

  void on_read(beast::error_code ec, std::size_t n) {
    if (ec) {
      if (ec == asio::error::not_found) queue(R"({"type":"error","code":"parse","message":"line too long"})");
      finish();
      return;
    }
    std::string line(asio::buffers_begin(buffer_.data()), asio::buffers_begin(buffer_.data()) + static_cast<std::ptrdiff_t>(n) - 1);
    buffer_.consume(n);
    if (!conn_->on_line(line)) {
      // replies are posted; close only after they have been queued
      asio::post(socket_.get_executor(), [self = shared_from_this()] {
        self->closing_ = true;
        if (self->writes_.empty()) self->shutdown();
      });
      return;
    }
    read();
  }

  // May be called from any thread.
  void queue(const std::string& line) {
    asio::post(socket_.get_executor(), [self = shared_from_this(), text = line + '\n']() mutable {
      self->writes_.push_back(std::move(text));
      if (self->writes_.size() == 1) self->write();
    });
  }

  void write() {
    asio::async_write(socket_, asio::buffer(writes_.front()),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) {
                        if (ec) {
                          self->writes_.clear();
                          self->finish();
                          return;
                        }
                        self->writes_.pop_front();
                        if (!self->writes_.empty()) {
                          self->write();
                        } else if (self->closing_) {
                          self->shutdown();
                        }
                      });
  }

  void shutdown() {
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

  void finish() {
    if (conn_) conn_->on_close();
  }

  tcp::socket socket_;
  asio::streambuf buffer_;
  Hub& hub_;
  std::shared_ptr<Connection> conn_;
  std::deque<std::string> writes_;
  bool closing_{false};
};

// Same protocol, one JSON object per WebSocket text message. Several
// newline-separated objects in one message are also accepted.
class WsPeer : public std::enable_shared_from_this<WsPeer> {
 public:
  WsPeer(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start() {
    ws_.read_message_max(kMaxLine);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      std::weak_ptr<WsPeer> weak = self;
      self->conn_ = std::make_shared<Connection>(
          self->hub_, [weak](const std::string& line) {
            if (auto s = weak.lock()) s->queue(line);
          },
          log_warning);
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      if (conn_) conn_->on_close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      if (!conn_->on_line(text.substr(pos, end - pos))) {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
          self->closing_ = true;
          if (self->writes_.empty()) self->close();
        });
        return;
      }
      pos = end + 1;
    }
    read();
  }

  void queue(const std::string& line) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), line]() {
      self->writes_.push_back(line);
      if (self->writes_.size() == 1) self->write();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(writes_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->writes_.clear();
        if (self->conn_) self->conn_->on_close();
        return;
      }
      self->writes_.pop_front();
      if (!self->writes_.empty()) {
        self->write();
      } else if (self->closing_) {
        self->close();
      }
    });
  }

  void close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  Hub& hub_;
  std::shared_ptr<Connection> conn_;
  std::deque<std::string> writes_;
  bool closing_{false};
};

tcp::acceptor open_acceptor(asio::io_context& ioc, const Endpoint& where, const char* what) {
  beast::error_code ec;
  const auto address = asio::ip::make_address(where.host == "localhost" ? "127.0.0.1" : where.host, ec);
  if (ec) throw std::runtime_error(std::string(what) + ": bad listen address '" + where.host + "'");
  const tcp::endpoint ep(address, where.port);
  tcp::acceptor acceptor(ioc);
  acceptor.open(ep.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(ep, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw std::runtime_error(std::string(what) + ": cannot listen on " + where.host + ":" +
                             std::to_string(where.port) + ": " + ec.message());
  }
  return acceptor;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint '" + text + "' must be host:port");
  Endpoint ep;
  const std::string host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  if (!host.empty()) ep.host = host;
  if (port.empty() || port.size() > 5 || port.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("endpoint '" + text + "': port must be a number in 0..65535");
  }
  const unsigned long value = std::stoul(port);
  if (value > 65535) throw std::invalid_argument("endpoint '" + text + "': port must be a number in 0..65535");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

struct Server::Impl {
  Impl(ServerOptions o, Hub& h) : options(std::move(o)), hub(h) {}

  template <class Peer>
  void accept(tcp::acceptor& acceptor) {
    acceptor.async_accept(asio::make_strand(ioc), [this, &acceptor](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      beast::error_code ignored;
      socket.set_option(tcp::no_delay(true), ignored);
      std::make_shared<Peer>(std::move(socket), hub)->start();
      accept<Peer>(acceptor);
    });
  }

  ServerOptions options;
  Hub& hub;
  asio::io_context ioc;
  std::optional<tcp::acceptor> tcp_acceptor;
  std::optional<tcp::acceptor> ws_acceptor;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool running{false};
};

Server::Server(ServerOptions options, Hub& hub) : impl_(std::make_unique<Impl>(std::move(options), hub)) {}

Server::~Server() { stop(); }

void Server::start() {
  auto& s = *impl_;
  if (s.running) return;
  s.tcp_acceptor.emplace(open_acceptor(s.ioc, s.options.tcp, "tcp"));
  if (s.options.websocket) s.ws_acceptor.emplace(open_acceptor(s.ioc, *s.options.websocket, "websocket"));
  s.accept<TcpPeer>(*s.tcp_acceptor);
  if (s.ws_acceptor) s.accept<WsPeer>(*s.ws_acceptor);
  s.running = true;
  const std::size_t n = std::max<std::size_t>(1, s.options.threads);
  for (std::size_t i = 0; i < n; ++i) s.threads.emplace_back([&s] { s.ioc.run(); });
}

void Server::stop() {
  auto& s = *impl_;
  {
    std::lock_guard lock(s.mutex);
    if (!s.running) return;
    s.running = false;
  }
  s.ioc.stop();
  for (auto& t : s.threads) {
    if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
  }
  s.threads.clear();
  s.tcp_acceptor.reset();
  s.ws_acceptor.reset();
  s.stopped_cv.notify_all();
}

void Server::wait() {
  auto& s = *impl_;
  std::unique_lock lock(s.mutex);
  s.stopped_cv.wait(lock, [&s] { return !s.running; });
}

std::uint16_t Server::tcp_port() const {
  if (!impl_->tcp_acceptor) throw std::logic_error("server not started");
  return impl_->tcp_acceptor->local_endpoint().port();
}

std::optional<std::uint16_t> Server::websocket_port() const {
  if (!impl_->ws_acceptor) return std::nullopt;
  return impl_->ws_acceptor->local_endpoint().port();
}

}  // namespace ssvep::streamd
