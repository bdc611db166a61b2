#include "hazmat/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "hazmat/text.hpp"

namespace hazmat::sim {

namespace {

struct Line {
    double t = 0;
    std::string_view source;
    std::string_view kind;
    std::string_view detail;
};

std::optional<Line> parse_line(std::string_view raw) {
    const auto parts = text::split(raw, '|');
    if (parts.size() != 4) return std::nullopt;
    const std::string t(parts[0]);
    return Line{std::strtod(t.c_str(), nullptr), parts[1], parts[2], parts[3]};
}

// Value of `name=` inside a comma-separated detail field.
std::string field(std::string_view detail, std::string_view name) {
    for (std::string_view item : text::split(detail, ',')) {
        if (item.size() > name.size() && item.substr(0, name.size()) == name && item[name.size()] == '=') {
            return std::string(item.substr(name.size() + 1));
        }
    }
    return {};
}

std::string_view source_id(std::string_view source) {
    const auto colon = source.find(':');
    return colon == std::string_view::npos ? std::string_view{} : source.substr(colon + 1);
}

}  // namespace

Metrics metrics(const std::vector<std::string>& log) {
    Metrics m;
    std::set<std::string> created, delivered, queued, backed_up;
    std::map<std::string, double> crash_t;  // truck id -> injection time
    std::map<std::string, double> latency;  // truck id -> first alert ingest after crash

    for (const auto& raw : log) {
        const auto line = parse_line(raw);
        if (!line) continue;
        const std::string_view kind = line->kind;
        if (kind == "READ_EVENT") {
            created.insert(field(line->detail, "key"));
            const std::string portal(source_id(line->source));
            ++m.reads_per_portal[static_cast<std::uint32_t>(std::strtoul(portal.c_str(), nullptr, 10))];
        } else if (kind == "INGEST_READ") {
            if (!delivered.insert(field(line->detail, "key")).second) ++m.duplicate_deliveries;
        } else if (kind == "END_QUEUED") {
            queued.insert(field(line->detail, "key"));
        } else if (kind == "END_BACKUP") {
            backed_up.insert(field(line->detail, "key"));
        } else if (kind == "CRASH_INJECT") {
            crash_t.emplace(std::string(source_id(line->source)), line->t);
        } else if (kind == "ALERT_COMPOSED") {
            ++m.alerts_composed;
        } else if (kind == "INGEST_ALERT") {
            ++m.alerts_delivered;
            const std::string key = field(line->detail, "key");
            const std::string unit = key.substr(0, key.find(':'));
            const auto crash = crash_t.find(unit);
            if (crash != crash_t.end() && !latency.count(unit)) latency[unit] = line->t - crash->second;
        } else if (kind == "END_PENDING_ALERT") {
            ++m.alerts_pending;
        } else if (kind == "FRAME_TX" || kind == "UPLINK" || kind == "ALERT_SENT") {
            ++m.frames_sent;
        } else if (kind == "FRAME_DROP" || kind == "INGEST_MALFORMED" || kind == "ACK_LOST") {
            ++m.frames_dropped;
        }
    }

    m.events_created = created.size();
    for (const auto& key : created) {
        if (delivered.count(key)) {
            ++m.events_delivered;
        } else if (queued.count(key)) {
            ++m.events_queued;
        } else if (backed_up.count(key)) {
            ++m.events_backup_only;
        } else {
            ++m.events_lost;
        }
    }
    for (const auto& [unit, dt] : latency) {
        m.max_alert_latency = std::max(m.max_alert_latency.value_or(dt), dt);
    }
    return m;
}

std::string format_metrics(const Metrics& m) {
    std::ostringstream os;
    os << "events_created: " << m.events_created << '\n';
    os << "events_delivered: " << m.events_delivered << '\n';
    os << "events_queued: " << m.events_queued << '\n';
    os << "events_backup_only: " << m.events_backup_only << '\n';
    os << "events_lost: " << m.events_lost << '\n';
    os << "duplicate_deliveries: " << m.duplicate_deliveries << '\n';
    os << "alerts_composed: " << m.alerts_composed << '\n';
    os << "alerts_delivered: " << m.alerts_delivered << '\n';
    os << "alerts_pending: " << m.alerts_pending << '\n';
    os << "max_alert_latency: " << (m.max_alert_latency ? text::fixed(*m.max_alert_latency) : std::string("none"))
       << '\n';
    os << "frames_sent: " << m.frames_sent << '\n';
    os << "frames_dropped: " << m.frames_dropped << '\n';
    for (const auto& [portal, n] : m.reads_per_portal) os << "reads_portal_" << portal << ": " << n << '\n';
    return os.str();
}

}  // namespace hazmat::sim
