#include "hazmat/dispatch.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <set>
#include <sstream>

#include "hazmat/bytes.hpp"
#include "hazmat/text.hpp"

namespace hazmat::dispatch {

void EventStore::journal_line(double t, std::string_view kind, const std::string& key,
                              std::span<const std::uint8_t> payload) {
    std::string line = text::fixed(t) + "|" + std::string(kind) + "|" + key + "|" + bytes::to_hex(payload);
    if (sink_) sink_(line);
    journal_.push_back(std::move(line));
}

bool EventStore::store_read(std::span<const std::uint8_t> payload, double now, IngestResult& result) {
    const EventId id = wire::peek_event_id(payload);
    result.ack.events.push_back(id);
    const std::string key = to_string(id);
    if (reads_.count(id)) {
        ++result.duplicates;
        return false;
    }
    ReadEvent event;
    try {
        event = wire::decode_read_event(payload);
    } catch (const Error& e) {
        const bool known = std::any_of(quarantine_.begin(), quarantine_.end(),
                                       [&](const Quarantined& q) { return q.key == "R" + key; });
        if (known) {
            ++result.duplicates;
        } else {
            quarantine_.push_back({now, "R" + key, e.code(), e.what()});
            result.quarantined.push_back(quarantine_.back());
            journal_line(now, "QUARANTINE", "R" + key, payload);
        }
        return false;
    }
    reads_.emplace(id, StoredRead{std::move(event), now});
    ingest_order_.push_back("R" + key);
    ++result.stored;
    result.stored_events.push_back(id);
    journal_line(now, "READ", key, payload);
    return true;
}

void EventStore::store_alert(std::span<const std::uint8_t> payload, double now, IngestResult& result) {
    const AlertKey k = wire::peek_alert_key(payload);
    result.ack.alerts.push_back(k);
    const std::string key = to_string(k);
    if (alerts_.count(k)) {
        ++result.duplicates;
        return;
    }
    truck::AlertMessage alert;
    try {
        alert = wire::decode_alert(payload);
    } catch (const Error& e) {
        if (e.code() == Errc::MalformedFrame) throw;
        const bool known = std::any_of(quarantine_.begin(), quarantine_.end(),
                                       [&](const Quarantined& q) { return q.key == "A" + key; });
        if (known) {
            ++result.duplicates;
        } else {
            quarantine_.push_back({now, "A" + key, e.code(), e.what()});
            result.quarantined.push_back(quarantine_.back());
            journal_line(now, "QUARANTINE", "A" + key, payload);
        }
        return;
    }
    alerts_.emplace(k, StoredAlert{std::move(alert), now, ingest_order_.size()});
    ingest_order_.push_back("A" + key);
    ++result.stored;
    result.stored_alerts.push_back(k);
    journal_line(now, "ALERT", key, payload);
}

IngestResult EventStore::ingest(std::span<const std::uint8_t> frame, double now) {
    wire::Frame decoded;
    try {
        decoded = wire::decode_frame(frame);
    } catch (const Error& e) {
        throw Error(Errc::MalformedFrame, e.what());
    }

    // Validate layout before touching the store so a bad frame stores nothing.
    std::vector<std::span<const std::uint8_t>> items;
    switch (decoded.type) {
    case wire::MsgType::Alert:
        wire::peek_alert_key(decoded.payload);
        break;
    case wire::MsgType::ReadEvent:
        items.emplace_back(decoded.payload);
        break;
    case wire::MsgType::Batch:
        items = wire::split_batch(decoded.payload);
        break;
    case wire::MsgType::Ack:
        throw Error(Errc::MalformedFrame, "dispatch does not accept ACK frames");
    }
    for (const auto& item : items) wire::peek_event_id(item);

    IngestResult result;
    std::unique_lock lock(mu_);
    if (decoded.type == wire::MsgType::Alert) {
        result.ack.acked = wire::MsgType::Alert;
        store_alert(decoded.payload, now, result);
    } else {
        result.ack.acked = decoded.type;
        for (const auto& item : items) store_read(item, now, result);
    }
    return result;
}

std::vector<TrackPoint> EventStore::track(std::uint64_t t_id) const {
    std::shared_lock lock(mu_);
    std::vector<TrackPoint> out;
    for (const auto& [id, stored] : reads_) {
        if (stored.event.t_id == t_id) out.push_back({id.portal_id, stored.event.t});
    }
    std::stable_sort(out.begin(), out.end(), [](const TrackPoint& a, const TrackPoint& b) {
        return a.t != b.t ? a.t < b.t : a.portal_id < b.portal_id;
    });
    return out;
}

std::vector<truck::AlertMessage> EventStore::active_alerts() const {
    std::shared_lock lock(mu_);
    std::vector<const StoredAlert*> sorted;
    for (const auto& [key, stored] : alerts_) sorted.push_back(&stored);
    std::sort(sorted.begin(), sorted.end(), [](const StoredAlert* a, const StoredAlert* b) {
        return a->alert.t != b->alert.t ? a->alert.t > b->alert.t : a->order > b->order;
    });
    std::vector<truck::AlertMessage> out;
    for (const auto* s : sorted) out.push_back(s->alert);
    return out;
}

ReportSummary EventStore::report(double from, double to) const {
    if (from > to) {
        throw Error(Errc::InvalidRange, "from " + text::fixed(from) + " is after to " + text::fixed(to));
    }
    std::shared_lock lock(mu_);
    ReportSummary out;
    std::set<std::uint64_t> trucks;
    for (const auto& [id, stored] : reads_) {
        if (stored.event.t < from || stored.event.t >= to) continue;
        ++out.reads_per_portal[id.portal_id];
        ++out.total_reads;
        trucks.insert(stored.event.t_id);
    }
    for (const auto& [key, stored] : alerts_) {
        if (stored.alert.t >= from && stored.alert.t < to) ++out.alerts;
    }
    out.distinct_trucks = trucks.size();
    return out;
}

std::string format_report(const ReportSummary& report, double from, double to) {
    std::ostringstream os;
    os << "report [" << text::fixed(from) << ", " << text::fixed(to) << ")\n";
    os << "portal_id  reads\n";
    for (const auto& [portal, n] : report.reads_per_portal) {
        std::string id = std::to_string(portal);
        os << id << std::string(id.size() < 11 ? 11 - id.size() : 1, ' ') << n << '\n';
    }
    os << "total reads:     " << report.total_reads << '\n';
    os << "distinct trucks: " << report.distinct_trucks << '\n';
    os << "alerts:          " << report.alerts << '\n';
    return os.str();
}

std::size_t EventStore::read_count() const {
    std::shared_lock lock(mu_);
    return reads_.size();
}

std::size_t EventStore::alert_count() const {
    std::shared_lock lock(mu_);
    return alerts_.size();
}

std::vector<Quarantined> EventStore::quarantined() const {
    std::shared_lock lock(mu_);
    return quarantine_;
}

bool EventStore::contains(const EventId& id) const {
    std::shared_lock lock(mu_);
    return reads_.count(id) != 0;
}

std::vector<EventId> EventStore::event_ids() const {
    std::shared_lock lock(mu_);
    std::vector<EventId> out;
    for (const auto& [id, stored] : reads_) out.push_back(id);
    return out;
}

std::vector<std::pair<AlertKey, double>> EventStore::alert_ingest_times() const {
    std::shared_lock lock(mu_);
    std::vector<std::pair<AlertKey, double>> out;
    for (const auto& [key, stored] : alerts_) out.emplace_back(key, stored.ingest_t);
    return out;
}

std::vector<std::string> EventStore::journal() const {
    std::shared_lock lock(mu_);
    return journal_;
}

std::string EventStore::journal_text() const {
    std::shared_lock lock(mu_);
    std::string out;
    for (const auto& line : journal_) out += line + "\n";
    return out;
}

void EventStore::set_journal_sink(std::function<void(const std::string&)> sink) {
    std::unique_lock lock(mu_);
    sink_ = std::move(sink);
}

void EventStore::replay(std::string_view journal_text) {
    std::size_t line_no = 0;
    for (std::string_view line : text::split(journal_text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw Error(Errc::MalformedLog, "line " + std::to_string(line_no) + ": " + why);
        };
        const auto parts = text::split(line, '|');
        if (parts.size() != 4) fail("expected t|kind|key|payload_hex");
        const std::string t_str(parts[0]);
        char* end = nullptr;
        const double t = std::strtod(t_str.c_str(), &end);
        if (t_str.empty() || end != t_str.c_str() + t_str.size()) fail("bad time '" + t_str + "'");
        std::vector<std::uint8_t> payload;
        if (!bytes::from_hex(parts[3], payload)) fail("payload is not hex");

        IngestResult scratch;
        std::unique_lock lock(mu_);
        try {
            if (parts[1] == "READ") {
                if (!store_read(payload, t, scratch)) fail("read event does not decode or is duplicated");
            } else if (parts[1] == "ALERT") {
                store_alert(payload, t, scratch);
                if (scratch.stored != 1) fail("alert does not decode or is duplicated");
            } else if (parts[1] == "QUARANTINE") {
                const bool is_alert = !parts[2].empty() && parts[2].front() == 'A';
                if (is_alert) {
                    store_alert(payload, t, scratch);
                } else {
                    store_read(payload, t, scratch);
                }
                if (scratch.quarantined.size() != 1) fail("quarantine record does not reproduce");
            } else {
                fail("unknown kind '" + std::string(parts[1]) + "'");
            }
        } catch (const Error& e) {
            if (e.code() == Errc::MalformedLog) throw;
            fail(e.what());
        }
    }
}

}  // namespace hazmat::dispatch
