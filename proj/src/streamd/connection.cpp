#include <stdexcept>

#include "ssvep/streamd.hpp"

namespace ssvep::streamd {

using nlohmann::json;

namespace {

json error_message(const std::string& code, const std::string& message) {
  return json{{"type", "error"}, {"code", code}, {"message", message}};
}

}  // namespace

Connection::Connection(Hub& hub, Sink sink, Logger warn)
    : hub_(hub), sink_(std::move(sink)), warn_(std::move(warn)) {}

Connection::~Connection() { on_close(); }

void Connection::deliver(const std::string& line) {
  if (!closed_) sink_(line);
}

void Connection::send(const json& message) { sink_(message.dump()); }

void Connection::on_close() {
  if (closed_) return;
  closed_ = true;
  if (role_ == Role::Source) hub_.detach_source(session_name_);
  session_.reset();
}

void Connection::become_source(const std::string& name) {
  auto session = hub_.attach_source(name);
  if (!session) {
    send(error_message("session_busy", "session '" + name + "' already has a source"));
    return;
  }
  role_ = Role::Source;
  session_name_ = name;
  session_ = std::move(session);
  std::lock_guard lock(session_->mutex);
  send(json{{"type", "hello"}, {"version", kProtocolVersion}, {"role", "source"}, {"session", name}});
  const json cfg = session_->state->describe();
  send(cfg);
  Hub::publish(*session_, cfg);
}

bool Connection::on_line(const std::string& line) {
  if (closed_) return false;
  if (line.find_first_not_of(" \t\r") == std::string::npos) return true;

  json message;
  try {
    message = json::parse(line);
  } catch (const json::parse_error& ex) {
    send(error_message("parse", ex.what()));
    return true;
  }
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
    send(error_message("parse", "message must be an object with a string 'type'"));
    return true;
  }
  const std::string type = message["type"].get<std::string>();

  try {
    if (type == "hello") {
      if (role_ != Role::None) {
        send(error_message("protocol", "hello already received"));
        return true;
      }
      const std::string role = message.value("role", std::string("source"));
      const std::string name = message.value("session", std::string("default"));
      if (name.empty()) {
        send(error_message("protocol", "session name must not be empty"));
      } else if (role == "source") {
        become_source(name);
      } else if (role == "subscriber") {
        role_ = Role::Subscriber;
        session_name_ = name;
        send(json{{"type", "hello"}, {"version", kProtocolVersion}, {"role", "subscriber"}, {"session", name}});
        session_ = hub_.subscribe(name, shared_from_this());
        std::lock_guard lock(session_->mutex);
        send(session_->state ? session_->state->describe() : hub_.make_state(name, hub_.default_config())->describe());
      } else {
        send(error_message("protocol", "unknown role '" + role + "'"));
      }
    } else if (type == "config") {
      handle_config(message);
    } else if (type == "samples") {
      handle_samples(message);
    } else if (type == "bye") {
      send(json{{"type", "bye"}});
      on_close();
      return false;
    } else {
      if (warn_) warn_("ignoring message of unknown type '" + type + "'");
    }
  } catch (const json::exception& ex) {
    send(error_message("protocol", std::string("malformed '") + type + "' message: " + ex.what()));
  }
  return true;
}

void Connection::handle_config(const json& message) {
  if (role_ != Role::Source) {
    send(error_message("protocol", "only a source may change the session config"));
    return;
  }
  SessionConfig config = hub_.default_config();
  std::unique_ptr<SessionState> state;
  try {
    if (message.contains("config")) from_json(message.at("config"), config);
    state = hub_.make_state(session_name_, config);
  } catch (const std::exception& ex) {
    send(error_message("bad_config", ex.what()));
    return;
  }
  std::lock_guard lock(session_->mutex);
  session_->state = std::move(state);
  const json cfg = session_->state->describe();
  send(cfg);
  Hub::publish(*session_, cfg);
}

void Connection::handle_samples(const json& message) {
  if (role_ != Role::Source) {
    send(error_message("protocol", "samples require a hello with role 'source'"));
    return;
  }
  SampleBatch batch;
  batch.start = message.at("start").get<std::uint64_t>();
  batch.values = message.at("values").get<std::vector<double>>();
  batch.resync = message.value("resync", false);

  std::lock_guard lock(session_->mutex);
  for (const json& event : session_->state->handle_samples(batch)) {
    send(event);
    Hub::publish(*session_, event);
  }
  json ack{{"type", "ack"}, {"start", batch.start}, {"count", batch.values.size()}};
  const auto next = session_->state->next_counter();
  ack["next"] = next ? json(*next) : json(nullptr);
  send(ack);
}

}  // namespace ssvep::streamd
