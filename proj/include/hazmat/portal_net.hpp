#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hazmat/events.hpp"
#include "hazmat/wire.hpp"

namespace hazmat::net {

inline constexpr double kDefaultReadRange = 12.0;
inline constexpr double kPassageCooldown = 5.0;
inline constexpr std::size_t kDefaultRatio = 10;

enum class PortalKind { Relay, Aggregator };

struct TruckPose {
    std::uint64_t t_id = 0;
    double position_m = 0;
    int heading = +1;  // +1 toward increasing road position, -1 otherwise
    bool rolled_over = false;
};

struct VisibleTag {
    std::uint32_t c_id = 0;
    HazmatCard card;
};

struct BackupRecord {
    double t = 0;  // time the portal logged it
    ReadEvent event;
};

struct PortalStats {
    std::size_t crc_drops = 0;
    std::size_t frames_sent = 0;
    std::size_t acks_received = 0;
};

// Roadside reader. A RELAY forwards point-to-point to next_hop; an AGGREGATOR
// batches everything it holds to dispatch over GSM. Either way an event leaves
// the queue only when the receiver acknowledges it.
class Portal {
public:
    Portal(std::uint32_t id, double position_m, PortalKind kind, std::optional<std::uint32_t> next_hop,
           std::uint32_t assigned_aggregator, double read_range_m = kDefaultReadRange);

    std::uint32_t id() const noexcept { return id_; }
    double position_m() const noexcept { return position_m_; }
    PortalKind kind() const noexcept { return kind_; }
    std::optional<std::uint32_t> next_hop() const noexcept { return next_hop_; }
    std::uint32_t assigned_aggregator() const noexcept { return aggregator_; }
    double read_range_m() const noexcept { return read_range_m_; }
    bool backup_enabled() const noexcept { return backup_enabled_; }

    void set_read_range(double meters) { read_range_m_ = meters; }
    void set_backup_enabled(bool on) { backup_enabled_ = on; }

    // One event per passage: nothing if the truck is out of range, no tag is
    // visible, or this truck was already seen here within kPassageCooldown.
    std::optional<ReadEvent> observe(const TruckPose& truck, std::span<const VisibleTag> visible, double now);

    // Incoming READ_EVENT or BATCH from a neighbor. Returns the ACK frame, or
    // nullopt when the frame is dropped (bad checksum, malformed, wrong type).
    std::optional<wire::Bytes> receive(std::span<const std::uint8_t> frame, double now);

    // RELAY: every queued event as a READ_EVENT frame; nothing when the link is down.
    std::vector<wire::Bytes> forward(bool link_up);

    // AGGREGATOR: one BATCH frame with the oldest queued events (up to
    // wire::kMaxBatchEvents) when GSM is up.
    std::optional<wire::Bytes> uplink(double now, bool gsm_up);

    // Removes acknowledged events. Corrupted or foreign ACKs are ignored.
    std::size_t on_ack(std::span<const std::uint8_t> frame);

    std::vector<EventId> queued() const;
    std::size_t queue_size() const noexcept { return queue_.size(); }
    const std::vector<BackupRecord>& backup_log() const noexcept { return backup_; }
    const PortalStats& stats() const noexcept { return stats_; }

    // `t|portal_id|c_id|pass_no|t_id` per backup record.
    std::string backup_log_text() const;

private:
    void enqueue(const ReadEvent& event, double now, bool own);

    std::uint32_t id_;
    double position_m_;
    PortalKind kind_;
    std::optional<std::uint32_t> next_hop_;
    std::uint32_t aggregator_;
    double read_range_m_;
    bool backup_enabled_;

    struct Queued {
        ReadEvent event;
        wire::Bytes frame;  // cached READ_EVENT frame for relays
    };
    std::vector<Queued> queue_;
    std::set<EventId> seen_;
    std::map<std::uint64_t, double> last_seen_;
    std::map<std::uint64_t, std::uint32_t> passes_;
    std::vector<BackupRecord> backup_;
    PortalStats stats_;
};

// Splits sorted positions into consecutive groups of at most `ratio`; the
// centermost portal of each group aggregates, the others relay one step toward
// it. Portal ids are 1-based positions in the input.
std::vector<Portal> assign_topology(std::span<const double> positions, std::size_t ratio = kDefaultRatio);

// Hops from portal `id` to its aggregator following next_hop links; nullopt on
// a cycle or dangling link.
std::optional<std::size_t> hops_to_aggregator(std::span<const Portal> portals, std::uint32_t id);

// Per-tick transport behavior injected by the caller (simulator or test).
struct LinkHooks {
    std::function<bool(std::uint32_t portal_id)> link_up = [](std::uint32_t) { return true; };
    std::function<bool(std::uint32_t portal_id)> gsm_up = [](std::uint32_t) { return true; };
    std::function<bool(std::uint32_t from, std::uint32_t to)> drop_ack = [](std::uint32_t, std::uint32_t) {
        return false;
    };
    std::function<void(wire::Bytes&)> corrupt = [](wire::Bytes&) {};
    // Dispatch endpoint: returns the ACK frame or nullopt if dispatch rejected it.
    std::function<std::optional<wire::Bytes>(std::span<const std::uint8_t>, double now)> dispatch;
    std::function<void(double t, std::uint32_t portal_id, std::string_view kind, const std::string& detail)> log =
        [](double, std::uint32_t, std::string_view, const std::string&) {};
};

class RoadNetwork {
public:
    explicit RoadNetwork(std::vector<Portal> portals);

    std::vector<Portal>& portals() noexcept { return portals_; }
    const std::vector<Portal>& portals() const noexcept { return portals_; }
    Portal& portal(std::uint32_t id);

    // Relays forward deepest-first so an event can cross a whole chain in one
    // step when every link is up; then aggregators uplink in id order.
    void step(double now, const LinkHooks& hooks);

private:
    std::vector<Portal> portals_;
    std::vector<std::size_t> relay_order_;
};

}  // namespace hazmat::net
