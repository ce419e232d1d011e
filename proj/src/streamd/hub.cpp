#include <algorithm>
#include <stdexcept>

#include "ssvep/streamd.hpp"

namespace ssvep::streamd {

using nlohmann::json;

Hub::Hub(HubOptions options) : options_(std::move(options)) {
  options_.config.validate();
  // fail at startup rather than on the first source
  make_state("probe", options_.config);
}

std::unique_ptr<SessionState> Hub::make_state(const std::string& name, const SessionConfig& config) const {
  return std::make_unique<SessionState>(name, config, options_.classifier);
}

std::shared_ptr<Hub::Session> Hub::get_or_create(const std::string& name) {
  std::lock_guard lock(mutex_);
  auto& slot = sessions_[name];
  if (!slot) slot = std::make_shared<Session>();
  return slot;
}

std::shared_ptr<Hub::Session> Hub::attach_source(const std::string& name) {
  auto session = get_or_create(name);
  std::lock_guard lock(session->mutex);
  if (session->has_source) return nullptr;
  session->has_source = true;
  // each source starts a fresh stream; subscribers stay attached
  session->state = make_state(name, options_.config);
  return session;
}

void Hub::detach_source(const std::string& name) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(name);
    if (it == sessions_.end()) return;
    session = it->second;
  }
  std::lock_guard lock(session->mutex);
  session->has_source = false;
}

std::shared_ptr<Hub::Session> Hub::subscribe(const std::string& name, const std::shared_ptr<Subscriber>& sub) {
  auto session = get_or_create(name);
  std::lock_guard lock(session->mutex);
  session->subscribers.push_back(sub);
  return session;
}

void Hub::publish(Session& session, const json& message) {
  const std::string line = message.dump();
  auto& subs = session.subscribers;
  subs.erase(std::remove_if(subs.begin(), subs.end(), [](const auto& w) { return w.expired(); }), subs.end());
  for (const auto& weak : subs) {
    if (auto sub = weak.lock()) sub->deliver(line);
  }
}

}  // namespace ssvep::streamd
