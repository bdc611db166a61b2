#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazmat/events.hpp"
#include "hazmat/truck_unit.hpp"
#include "hazmat/wire.hpp"

namespace hazmat::dispatch {

struct Quarantined {
    double ingest_t = 0;
    std::string key;
    Errc reason = Errc::CardDecodeFailure;
    std::string detail;
};

struct IngestResult {
    wire::Ack ack;
    std::size_t stored = 0;      // new keys
    std::size_t duplicates = 0;  // keys already present, ignored
    std::vector<EventId> stored_events;
    std::vector<AlertKey> stored_alerts;
    std::vector<Quarantined> quarantined;
};

struct TrackPoint {
    std::uint32_t portal_id = 0;
    double t = 0;
    friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

struct ReportSummary {
    std::map<std::uint32_t, std::size_t> reads_per_portal;
    std::size_t total_reads = 0;
    std::size_t distinct_trucks = 0;
    std::size_t alerts = 0;
    friend bool operator==(const ReportSummary&, const ReportSummary&) = default;
};

std::string format_report(const ReportSummary& report, double from, double to);

// Idempotent, insert-only store of everything the road network and the trucks
// deliver. Safe for concurrent ingest and queries; each query sees the state
// after some completed ingest.
//
// Every newly stored item is journaled as `t|kind|key|payload_hex`, kind in
// {READ, ALERT, QUARANTINE}; replaying the journal rebuilds the store.
class EventStore {
public:
    EventStore() = default;
    EventStore(const EventStore&) = delete;
    EventStore& operator=(const EventStore&) = delete;

    // Throws MalformedFrame for anything that is not a verifiable ALERT,
    // READ_EVENT or BATCH frame. Items whose card does not decode are
    // acknowledged and quarantined.
    IngestResult ingest(std::span<const std::uint8_t> frame, double now);

    std::vector<TrackPoint> track(std::uint64_t t_id) const;
    // Newest (by crash time) first.
    std::vector<truck::AlertMessage> active_alerts() const;
    // Counts items with event time in [from, to). Throws InvalidRange if from > to.
    ReportSummary report(double from, double to) const;

    std::size_t read_count() const;
    std::size_t alert_count() const;
    std::vector<Quarantined> quarantined() const;
    bool contains(const EventId& id) const;
    std::vector<EventId> event_ids() const;
    // (alert key, ingest time) in ingest order
    std::vector<std::pair<AlertKey, double>> alert_ingest_times() const;

    std::vector<std::string> journal() const;
    std::string journal_text() const;
    // Called under the store lock for every journal line as it is written.
    void set_journal_sink(std::function<void(const std::string&)> sink);

    // Rebuilds from journal text. Throws MalformedLog with the line number.
    void replay(std::string_view journal_text);

private:
    struct StoredRead {
        ReadEvent event;
        double ingest_t;
    };
    struct StoredAlert {
        truck::AlertMessage alert;
        double ingest_t;
        std::size_t order;
    };

    bool store_read(std::span<const std::uint8_t> payload, double now, IngestResult& result);
    void store_alert(std::span<const std::uint8_t> payload, double now, IngestResult& result);
    void journal_line(double t, std::string_view kind, const std::string& key, std::span<const std::uint8_t> payload);

    mutable std::shared_mutex mu_;
    std::map<EventId, StoredRead> reads_;
    std::map<AlertKey, StoredAlert> alerts_;
    std::vector<Quarantined> quarantine_;
    std::vector<std::string> ingest_order_;
    std::vector<std::string> journal_;
    std::function<void(const std::string&)> sink_;
};

}  // namespace hazmat::dispatch
