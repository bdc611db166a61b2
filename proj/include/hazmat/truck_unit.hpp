#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hazmat/card.hpp"

namespace hazmat::truck {

inline constexpr std::string_view kAlarmText = "ALERT ACCIDENT";
inline constexpr std::string_view kSpeedText = "SPEED LIMIT";
inline constexpr std::string_view kHarshText = "HARSH DRIVING";

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

double distance(const Vec3& a, const Vec3& b) noexcept;

// Accelerometer sample in m/s^2 plus roll angle in degrees.
struct SensorSample {
    double t = 0;
    Vec3 accel;
    double roll_deg = 0;
};

struct GpsFix {
    double t = 0;
    double lat = 0;
    double lon = 0;
    double speed_kmh = 0;
};

struct Position {
    double lat = 0;
    double lon = 0;
    friend bool operator==(const Position&, const Position&) = default;
};

enum class Mode { Normal, Warning, Alerting };
std::string_view to_string(Mode mode) noexcept;

struct UnitConfig {
    double speed_limit_kmh = 70.0;
    double crash_accel = 40.0;      // |delta accel| between consecutive samples, m/s^2
    double jerk_warn = 15.0;        // m/s^3
    double rollover_deg = 60.0;
    double rollover_sustain_s = 0.5;
    double speed_sustain_s = 2.0;
    double retry_interval_s = 1.0;
    std::uint32_t max_retries = 5;
};

enum class EffectKind { PlayMessage, DisplayText, ReadLocalTag, ComposeAlert, SendAlert };
std::string_view to_string(EffectKind kind) noexcept;

struct Effect {
    EffectKind kind;
    std::string text;  // DisplayText: screen text; PlayMessage: clip name; SendAlert: seq_no

    friend bool operator==(const Effect&, const Effect&) = default;
};

using Effects = std::vector<Effect>;

struct AlertMessage {
    std::string alarm_code{kAlarmText};
    double t = 0;                      // crash detection time
    std::optional<Position> position;  // nullopt: no GPS fix was ever received
    HazmatCard card;
    std::uint64_t unit_id = 0;
    std::uint32_t seq_no = 0;

    bool no_fix() const noexcept { return !position.has_value(); }

    friend bool operator==(const AlertMessage&, const AlertMessage&) = default;
};

// Onboard black-box unit. Effects are returned, never performed; the caller
// (simulator or test) interprets them.
//
// Modes: NORMAL <-> WARNING, {NORMAL, WARNING} -> ALERTING, ALERTING -> NORMAL
// once the pending alert is acknowledged.
class TruckUnit {
public:
    explicit TruckUnit(std::uint64_t unit_id, UnitConfig config = {});

    Effects ingest_sample(const SensorSample& sample);
    Effects ingest_fix(const GpsFix& fix);

    // Requires ALERTING with no alert composed yet for the current crash.
    // Position comes from the latest fix; without one the alert carries no position.
    AlertMessage compose_alert(const HazmatCard& card);

    Effects tick(double now, bool channel_up);

    // Clears the pending alert if seq_no matches. Returns whether it did.
    bool acknowledge(std::uint32_t seq_no);

    // Emits the partially filled sample-summary window, if any.
    void flush_blackbox();

    Mode mode() const noexcept { return mode_; }
    std::uint64_t unit_id() const noexcept { return unit_id_; }
    const UnitConfig& config() const noexcept { return config_; }
    const std::optional<AlertMessage>& pending_alert() const noexcept { return pending_; }
    const std::optional<GpsFix>& last_fix() const noexcept { return last_fix_; }
    std::uint32_t send_attempts() const noexcept { return attempts_; }
    const std::vector<std::string>& blackbox() const noexcept { return blackbox_; }

private:
    Effects update_warning();
    void record(double t, std::string_view kind, const std::string& payload);
    void record_effects(double t, const Effects& effects);

    std::uint64_t unit_id_;
    UnitConfig config_;
    Mode mode_ = Mode::Normal;

    std::optional<SensorSample> last_sample_;
    int crash_pairs_ = 0;
    std::optional<double> roll_since_;
    bool roll_latched_ = false;
    bool jerk_active_ = false;

    std::optional<GpsFix> last_fix_;
    std::optional<double> over_since_;
    bool speeding_active_ = false;

    bool compose_due_ = false;
    double crash_t_ = 0;
    std::uint32_t next_seq_ = 1;
    std::optional<AlertMessage> pending_;
    std::optional<double> last_send_;
    std::uint32_t attempts_ = 0;
    bool retry_limit_logged_ = false;
    std::optional<double> last_tick_;

    // SAMPLE_SUMMARY window, one per whole second of sample time
    std::optional<double> window_second_;
    double window_last_t_ = 0;
    std::size_t window_n_ = 0;
    double window_max_delta_ = 0;
    double window_max_roll_ = 0;

    std::vector<std::string> blackbox_;
};

}  // namespace hazmat::truck
