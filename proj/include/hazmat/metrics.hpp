#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hazmat::sim {

struct Metrics {
    std::size_t events_created = 0;
    std::size_t events_delivered = 0;
    std::size_t events_queued = 0;
    std::size_t events_backup_only = 0;
    std::size_t events_lost = 0;
    std::size_t duplicate_deliveries = 0;  // a key stored twice at dispatch; must stay 0
    std::size_t alerts_composed = 0;
    std::size_t alerts_delivered = 0;
    std::size_t alerts_pending = 0;
    std::optional<double> max_alert_latency;  // crash injection -> dispatch ingest
    std::size_t frames_sent = 0;
    std::size_t frames_dropped = 0;
    std::map<std::uint32_t, std::size_t> reads_per_portal;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Pure function of the simulation log.
Metrics metrics(const std::vector<std::string>& log);

std::string format_metrics(const Metrics& m);

}  // namespace hazmat::sim
