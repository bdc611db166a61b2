#include "hazmat/truck_unit.hpp"

#include <cmath>

#include "hazmat/text.hpp"

namespace hazmat::truck {
namespace {
constexpr double kTimeEps = 1e-9;
}

double distance(const Vec3& a, const Vec3& b) noexcept {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
    case Mode::Normal: return "NORMAL";
    case Mode::Warning: return "WARNING";
    case Mode::Alerting: return "ALERTING";
    }
    return "?";
}

std::string_view to_string(EffectKind kind) noexcept {
    switch (kind) {
    case EffectKind::PlayMessage: return "PlayMessage";
    case EffectKind::DisplayText: return "DisplayText";
    case EffectKind::ReadLocalTag: return "ReadLocalTag";
    case EffectKind::ComposeAlert: return "ComposeAlert";
    case EffectKind::SendAlert: return "SendAlert";
    }
    return "?";
}

TruckUnit::TruckUnit(std::uint64_t unit_id, UnitConfig config) : unit_id_(unit_id), config_(config) {}

void TruckUnit::record(double t, std::string_view kind, const std::string& payload) {
    blackbox_.push_back(text::fixed(t) + "|" + std::string(kind) + "|" + payload);
}

void TruckUnit::record_effects(double t, const Effects& effects) {
    for (const auto& e : effects) {
        std::string payload(to_string(e.kind));
        if (!e.text.empty()) payload += "," + e.text;
        record(t, "EFFECT", payload);
    }
}

void TruckUnit::flush_blackbox() {
    if (!window_second_ || window_n_ == 0) return;
    record(window_last_t_, "SAMPLE_SUMMARY",
           std::to_string(window_n_) + "," + text::fixed(window_max_delta_) + "," + text::fixed(window_max_roll_));
    window_n_ = 0;
    window_max_delta_ = 0;
    window_max_roll_ = 0;
}

Effects TruckUnit::update_warning() {
    Effects out;
    if (mode_ == Mode::Alerting) return out;
    const bool want = speeding_active_ || jerk_active_;
    if (mode_ == Mode::Normal && want) {
        mode_ = Mode::Warning;
        // Speeding names the warning when both causes are live.
        out.push_back({EffectKind::PlayMessage, speeding_active_ ? "speed_limit" : "harsh_driving"});
        out.push_back({EffectKind::DisplayText, std::string(speeding_active_ ? kSpeedText : kHarshText)});
    } else if (mode_ == Mode::Warning && !want) {
        mode_ = Mode::Normal;
    }
    return out;
}

Effects TruckUnit::ingest_sample(const SensorSample& sample) {
    if (last_sample_ && sample.t <= last_sample_->t) {
        throw Error(Errc::NonMonotonicTime, "sample t=" + text::fixed(sample.t) + " not after " +
                                                text::fixed(last_sample_->t));
    }
    if (!(std::abs(sample.roll_deg) <= 180.0)) {
        throw Error(Errc::InvalidSample, "roll angle " + text::fixed(sample.roll_deg) + " outside [-180, 180]");
    }

    double delta = 0;
    if (last_sample_) {
        delta = distance(sample.accel, last_sample_->accel);
        crash_pairs_ = delta >= config_.crash_accel ? crash_pairs_ + 1 : 0;
        jerk_active_ = delta / (sample.t - last_sample_->t) > config_.jerk_warn;
    }
    last_sample_ = sample;

    bool rolled = false;
    if (std::abs(sample.roll_deg) >= config_.rollover_deg) {
        if (!roll_since_) roll_since_ = sample.t;
        rolled = !roll_latched_ && sample.t - *roll_since_ >= config_.rollover_sustain_s - kTimeEps;
    } else {
        roll_since_.reset();
        roll_latched_ = false;
    }

    // Black-box summary window
    const double second = std::floor(sample.t);
    if (window_second_ && *window_second_ != second) flush_blackbox();
    window_second_ = second;
    window_last_t_ = sample.t;
    ++window_n_;
    window_max_delta_ = std::max(window_max_delta_, delta);
    window_max_roll_ = std::max(window_max_roll_, std::abs(sample.roll_deg));

    Effects out;
    const bool crash = crash_pairs_ >= 2 || rolled;
    if (crash && mode_ != Mode::Alerting) {
        mode_ = Mode::Alerting;
        crash_pairs_ = 0;
        if (rolled) roll_latched_ = true;
        compose_due_ = true;
        crash_t_ = sample.t;
        out = {{EffectKind::ReadLocalTag, ""},
               {EffectKind::ComposeAlert, ""},
               {EffectKind::PlayMessage, "alert_accident"},
               {EffectKind::DisplayText, std::string(kAlarmText)}};
    } else {
        out = update_warning();
    }
    record_effects(sample.t, out);
    return out;
}

Effects TruckUnit::ingest_fix(const GpsFix& fix) {
    if (last_fix_ && fix.t <= last_fix_->t) {
        throw Error(Errc::NonMonotonicTime, "fix t=" + text::fixed(fix.t) + " not after " + text::fixed(last_fix_->t));
    }
    if (!(fix.speed_kmh >= 0) || !(std::abs(fix.lat) <= 90) || !(std::abs(fix.lon) <= 180)) {
        throw Error(Errc::InvalidSample, "GPS fix out of range");
    }
    last_fix_ = fix;
    record(fix.t, "FIX", text::fixed(fix.lat, 6) + "," + text::fixed(fix.lon, 6) + "," + text::fixed(fix.speed_kmh, 2));

    if (fix.speed_kmh > config_.speed_limit_kmh) {
        if (!over_since_) over_since_ = fix.t;
        speeding_active_ = fix.t - *over_since_ >= config_.speed_sustain_s - kTimeEps;
    } else {
        over_since_.reset();
        speeding_active_ = false;
    }

    Effects out = update_warning();
    record_effects(fix.t, out);
    return out;
}

AlertMessage TruckUnit::compose_alert(const HazmatCard& card) {
    if (mode_ != Mode::Alerting || !compose_due_) {
        throw Error(Errc::InvalidState, "compose_alert outside a fresh crash");
    }
    if (const auto problems = validate_card(card); !problems.empty()) {
        throw Error(problems.front().code, "alert card: " + problems.front().field);
    }
    AlertMessage alert;
    alert.t = crash_t_;
    if (last_fix_) alert.position = Position{last_fix_->lat, last_fix_->lon};
    alert.card = card;
    alert.unit_id = unit_id_;
    alert.seq_no = next_seq_++;

    compose_due_ = false;
    pending_ = alert;
    last_send_.reset();
    attempts_ = 0;
    retry_limit_logged_ = false;

    std::string payload = std::to_string(alert.seq_no) + ",";
    payload += alert.position ? text::fixed(alert.position->lat, 6) + "," + text::fixed(alert.position->lon, 6)
                              : std::string("NOFIX,NOFIX");
    payload += "," + std::to_string(card.c_id);
    record(alert.t, "ALERT", payload);
    return alert;
}

Effects TruckUnit::tick(double now, bool channel_up) {
    if (last_tick_ && now < *last_tick_) {
        throw Error(Errc::NonMonotonicTime, "tick went backwards");
    }
    last_tick_ = now;
    Effects out;
    if (!pending_ || !channel_up) return out;

    const bool due = !last_send_ || now - *last_send_ >= config_.retry_interval_s - kTimeEps;
    if (!due) return out;

    last_send_ = now;
    ++attempts_;
    out.push_back({EffectKind::SendAlert, std::to_string(pending_->seq_no)});
    record_effects(now, out);
    if (attempts_ > config_.max_retries + 1 && !retry_limit_logged_) {
        // Past the retry budget the unit keeps sending at the same interval.
        record(now, "ALERT", std::to_string(pending_->seq_no) + ",RETRY_LIMIT_EXCEEDED");
        retry_limit_logged_ = true;
    }
    return out;
}

bool TruckUnit::acknowledge(std::uint32_t seq_no) {
    if (!pending_ || pending_->seq_no != seq_no) return false;
    record(last_tick_.value_or(pending_->t), "ALERT", std::to_string(seq_no) + ",ACKED");
    pending_.reset();
    mode_ = Mode::Normal;
    last_send_.reset();
    return true;
}

}  // namespace hazmat::truck
