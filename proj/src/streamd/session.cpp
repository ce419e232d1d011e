#include <cmath>
#include <stdexcept>
#include <string>

#include "ssvep/errors.hpp"
#include "ssvep/streamd.hpp"
#include "ssvep/synthgen.hpp"

namespace ssvep::streamd {

using nlohmann::json;

SessionState::SessionState(std::string session_id, SessionConfig config,
                           std::optional<pipeline::LinearClassifier> classifier)
    : id_(std::move(session_id)),
      config_(std::move(config)),
      classifier_(std::move(classifier)),
      smoother_(1) {
  config_.validate();
  probes_ = classifier_ ? classifier_->probe_freqs : config_.probe_freqs;
  if (probes_.empty()) throw std::invalid_argument("session: no probe frequencies");
  features_ = pipeline::FeatureOptions::from_config(config_);
  features_.threads = 1;

  // a trained classifier only makes sense on windows of the length it saw
  double length_s = config_.stream_policy.length_s;
  if (classifier_ && classifier_->window_length_s > 0.0) length_s = classifier_->window_length_s;
  window_ = static_cast<std::size_t>(std::llround(length_s * config_.fs));
  hop_ = static_cast<std::size_t>(std::llround(config_.stream_policy.hop_s * config_.fs));
  if (window_ < 64) throw std::invalid_argument("session: stream window shorter than 64 samples");
  if (hop_ < 1 || hop_ > window_) throw std::invalid_argument("session: hop must be in 1..window samples");

  ring_.assign(window_, 0.0);
  smoother_ = pipeline::SlidingSmoother(config_.smoother_depth);
}

void SessionState::reset_stream(std::uint64_t origin) {
  head_ = 0;
  count_ = 0;
  origin_ = origin;
  expected_ = origin;
  smoother_.reset();
}

std::vector<double> SessionState::latest_window() const {
  std::vector<double> out(window_);
  // ring is full here, so head_ is also the oldest sample
  for (std::size_t i = 0; i < window_; ++i) out[i] = ring_[(head_ + i) % window_];
  return out;
}

std::vector<json> SessionState::handle_samples(const SampleBatch& batch) {
  std::vector<json> events;
  auto error = [&](const std::string& code, const std::string& message) {
    json e{{"type", "error"}, {"session", id_}, {"code", code}, {"message", message}};
    return e;
  };

  if (batch.values.empty()) {
    events.push_back(error("empty_batch", "samples message carries no values"));
    return events;
  }
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    if (!std::isfinite(batch.values[i])) {
      json e = error("bad_sample", "non-finite sample value");
      e["counter"] = batch.start + i;
      events.push_back(std::move(e));
      return events;
    }
  }

  if (batch.resync || (!expected_ && !stalled_)) {
    reset_stream(batch.start);
    stalled_ = false;
  } else if (stalled_ || batch.start != *expected_) {
    json e = error("gap", stalled_ ? "stream stalled after a gap; send resync" : "sample counter gap");
    e["expected"] = expected_ ? json(*expected_) : json(nullptr);
    e["actual"] = batch.start;
    e["resync_required"] = true;
    stalled_ = true;
    events.push_back(std::move(e));
    return events;
  }

  std::uint64_t c = batch.start;
  for (double v : batch.values) {
    ring_[head_] = v;
    head_ = (head_ + 1) % window_;
    if (count_ < window_) ++count_;

    const std::uint64_t seen = c - origin_ + 1;
    if (seen >= window_ && (seen - window_) % hop_ == 0) {
      EegWindow w(latest_window(), config_.fs, static_cast<double>(c + 1 - window_) / config_.fs);
      const std::uint64_t index = window_index_++;
      try {
        const pipeline::FeatureRecord rec = pipeline::extract_window_features(w, probes_, features_);
        const double winner = classifier_ ? classifier_->predict(rec.t_values) : rec.argmax_freq();
        const std::optional<double> decided = smoother_.push(winner);

        json f{{"type", "feature"},   {"session", id_},        {"counter", c},
               {"window_index", index}, {"t0", w.t0},            {"probe_freqs", probes_},
               {"t_values", rec.t_values}, {"winner", winner},
               {"smoothed", decided ? json(*decided) : json(nullptr)}};
        events.push_back(std::move(f));
        if (decided) {
          events.push_back(json{{"type", "decision"},
                                {"session", id_},
                                {"counter", c},
                                {"window_index", index},
                                {"freq", *decided},
                                {"depth", smoother_.depth()}});
        }
      } catch (const NumericalError& ex) {
        json e = error("numerical", ex.what());
        e["counter"] = c;
        e["window_index"] = index;
        events.push_back(std::move(e));
      }
    }
    ++c;
  }
  expected_ = c;
  return events;
}

json SessionState::describe() const {
  json schedules = json::array();
  for (double f : probes_) {
    json s{{"freq", f}};
    try {
      const synthgen::FrameSchedule fs = synthgen::frame_schedule(f, config_.refresh_hz, config_.duty_for(f));
      s["available"] = true;
      s["pattern"] = fs.pattern;
      s["duty"] = fs.duty;
      s["requested_duty"] = fs.requested_duty;
      s["duty_adjusted"] = fs.duty_adjusted;
      s["effective_freq"] = fs.effective_freq;
    } catch (const std::invalid_argument& ex) {
      s["available"] = false;
      s["reason"] = ex.what();
    }
    schedules.push_back(std::move(s));
  }
  return json{{"type", "config"},
              {"session", id_},
              {"version", kProtocolVersion},
              {"config", config_},
              {"probe_freqs", probes_},
              {"window_samples", window_},
              {"hop_samples", hop_},
              {"classifier", classifier_.has_value()},
              {"frame_schedules", std::move(schedules)}};
}

}  // namespace ssvep::streamd
