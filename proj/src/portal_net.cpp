#include "hazmat/portal_net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hazmat/text.hpp"

namespace hazmat::net {

Portal::Portal(std::uint32_t id, double position_m, PortalKind kind, std::optional<std::uint32_t> next_hop,
               std::uint32_t assigned_aggregator, double read_range_m)
    : id_(id),
      position_m_(position_m),
      kind_(kind),
      next_hop_(next_hop),
      aggregator_(assigned_aggregator),
      read_range_m_(read_range_m),
      backup_enabled_(kind == PortalKind::Aggregator) {
    if ((kind == PortalKind::Relay) != next_hop.has_value()) {
        throw Error(Errc::InvalidScenario, "portal " + std::to_string(id) + ": relays need a next hop, aggregators none");
    }
    if (kind == PortalKind::Aggregator && assigned_aggregator != id) {
        throw Error(Errc::InvalidScenario, "aggregator " + std::to_string(id) + " must be its own aggregator");
    }
}

void Portal::enqueue(const ReadEvent& event, double now, bool own) {
    if (!seen_.insert(event.id).second) return;
    Queued q{event, {}};
    if (kind_ == PortalKind::Relay) q.frame = wire::read_event_frame(event);
    queue_.push_back(std::move(q));
    if (backup_enabled_ && (own || kind_ == PortalKind::Aggregator)) backup_.push_back({now, event});
}

std::optional<ReadEvent> Portal::observe(const TruckPose& truck, std::span<const VisibleTag> visible, double now) {
    if (std::abs(truck.position_m - position_m_) > read_range_m_ || visible.empty()) return std::nullopt;

    const auto last = last_seen_.find(truck.t_id);
    const bool same_passage = last != last_seen_.end() && now - last->second < kPassageCooldown;
    last_seen_[truck.t_id] = now;
    if (same_passage) return std::nullopt;

    const auto tag = std::min_element(visible.begin(), visible.end(),
                                      [](const VisibleTag& a, const VisibleTag& b) { return a.c_id < b.c_id; });
    ReadEvent event;
    event.id = EventId{id_, tag->c_id, ++passes_[truck.t_id]};
    event.t = now;
    event.t_id = truck.t_id;
    event.card = tag->card;
    enqueue(event, now, true);
    return event;
}

std::optional<wire::Bytes> Portal::receive(std::span<const std::uint8_t> frame, double now) {
    wire::Frame decoded;
    try {
        decoded = wire::decode_frame(frame);
    } catch (const Error&) {
        ++stats_.crc_drops;
        return std::nullopt;
    }
    if (decoded.type != wire::MsgType::ReadEvent) return std::nullopt;

    wire::Ack ack{wire::MsgType::ReadEvent, {}, {}};
    try {
        ack.events.push_back(wire::peek_event_id(decoded.payload));
    } catch (const Error&) {
        ++stats_.crc_drops;
        return std::nullopt;
    }
    try {
        enqueue(wire::decode_read_event(decoded.payload), now, false);
    } catch (const Error&) {
        // Card does not decode: acknowledged so the sender stops, but not kept.
    }
    return wire::ack_frame(ack);
}

std::vector<wire::Bytes> Portal::forward(bool link_up) {
    std::vector<wire::Bytes> out;
    if (kind_ != PortalKind::Relay || !link_up) return out;
    out.reserve(queue_.size());
    for (const auto& q : queue_) out.push_back(q.frame);
    stats_.frames_sent += out.size();
    return out;
}

std::optional<wire::Bytes> Portal::uplink(double /*now*/, bool gsm_up) {
    if (kind_ != PortalKind::Aggregator || !gsm_up || queue_.empty()) return std::nullopt;
    std::vector<ReadEvent> batch;
    const std::size_t n = std::min(queue_.size(), wire::kMaxBatchEvents);
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(queue_[i].event);
    ++stats_.frames_sent;
    return wire::batch_frame(batch);
}

std::size_t Portal::on_ack(std::span<const std::uint8_t> frame) {
    wire::Ack ack;
    try {
        const auto decoded = wire::decode_frame(frame);
        if (decoded.type != wire::MsgType::Ack) return 0;
        ack = wire::decode_ack(decoded.payload);
    } catch (const Error&) {
        ++stats_.crc_drops;
        return 0;
    }
    ++stats_.acks_received;
    const std::set<EventId> acked(ack.events.begin(), ack.events.end());
    const auto before = queue_.size();
    std::erase_if(queue_, [&](const Queued& q) { return acked.count(q.event.id) != 0; });
    return before - queue_.size();
}

std::vector<EventId> Portal::queued() const {
    std::vector<EventId> out;
    out.reserve(queue_.size());
    for (const auto& q : queue_) out.push_back(q.event.id);
    return out;
}

std::string Portal::backup_log_text() const {
    std::string out;
    for (const auto& r : backup_) {
        out += text::fixed(r.t) + "|" + std::to_string(r.event.id.portal_id) + "|" + std::to_string(r.event.id.c_id) +
               "|" + std::to_string(r.event.id.pass_no) + "|" + std::to_string(r.event.t_id) + "\n";
    }
    return out;
}

std::vector<Portal> assign_topology(std::span<const double> positions, std::size_t ratio) {
    if (positions.empty()) throw Error(Errc::EmptyTopology, "no portals");
    if (ratio == 0) throw Error(Errc::InvalidScenario, "aggregator ratio must be at least 1");
    if (!std::is_sorted(positions.begin(), positions.end())) {
        throw Error(Errc::InvalidScenario, "portal positions must be sorted ascending");
    }
    std::vector<Portal> out;
    out.reserve(positions.size());
    for (std::size_t start = 0; start < positions.size(); start += ratio) {
        const std::size_t size = std::min(ratio, positions.size() - start);
        const std::size_t center = start + (size - 1) / 2;
        const auto agg_id = static_cast<std::uint32_t>(center + 1);
        for (std::size_t i = start; i < start + size; ++i) {
            const auto id = static_cast<std::uint32_t>(i + 1);
            if (i == center) {
                out.emplace_back(id, positions[i], PortalKind::Aggregator, std::nullopt, agg_id);
            } else {
                const auto hop = static_cast<std::uint32_t>(i < center ? id + 1 : id - 1);
                out.emplace_back(id, positions[i], PortalKind::Relay, hop, agg_id);
            }
        }
    }
    return out;
}

std::optional<std::size_t> hops_to_aggregator(std::span<const Portal> portals, std::uint32_t id) {
    auto find = [&](std::uint32_t pid) -> const Portal* {
        const auto it = std::find_if(portals.begin(), portals.end(), [&](const Portal& p) { return p.id() == pid; });
        return it == portals.end() ? nullptr : &*it;
    };
    const Portal* p = find(id);
    std::size_t hops = 0;
    while (p && p->kind() == PortalKind::Relay) {
        if (++hops > portals.size()) return std::nullopt;
        p = find(*p->next_hop());
    }
    if (!p) return std::nullopt;
    return hops;
}

RoadNetwork::RoadNetwork(std::vector<Portal> portals) : portals_(std::move(portals)) {
    std::vector<std::pair<std::size_t, std::size_t>> depth;  // (hops, index)
    for (std::size_t i = 0; i < portals_.size(); ++i) {
        if (portals_[i].kind() != PortalKind::Relay) continue;
        const auto hops = hops_to_aggregator(portals_, portals_[i].id());
        if (!hops) throw Error(Errc::InvalidScenario, "relay " + std::to_string(portals_[i].id()) + " never reaches an aggregator");
        depth.emplace_back(*hops, i);
    }
    std::stable_sort(depth.begin(), depth.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [hops, index] : depth) relay_order_.push_back(index);
}

Portal& RoadNetwork::portal(std::uint32_t id) {
    const auto it = std::find_if(portals_.begin(), portals_.end(), [&](const Portal& p) { return p.id() == id; });
    if (it == portals_.end()) throw Error(Errc::InvalidScenario, "no portal " + std::to_string(id));
    return *it;
}

void RoadNetwork::step(double now, const LinkHooks& hooks) {
    for (const std::size_t index : relay_order_) {
        Portal& sender = portals_[index];
        const std::uint32_t to = *sender.next_hop();
        const bool up = hooks.link_up(sender.id());
        for (auto frame : sender.forward(up)) {
            hooks.log(now, sender.id(), "FRAME_TX", "to=" + std::to_string(to));
            hooks.corrupt(frame);
            auto ack = portal(to).receive(frame, now);
            if (!ack) {
                hooks.log(now, to, "FRAME_DROP", "from=" + std::to_string(sender.id()));
                continue;
            }
            if (hooks.drop_ack(to, sender.id())) {
                hooks.log(now, sender.id(), "ACK_LOST", "from=" + std::to_string(to));
                continue;
            }
            sender.on_ack(*ack);
        }
    }
    for (Portal& agg : portals_) {
        if (agg.kind() != PortalKind::Aggregator) continue;
        auto batch = agg.uplink(now, hooks.gsm_up(agg.id()));
        if (!batch) continue;
        hooks.log(now, agg.id(), "UPLINK", "queued=" + std::to_string(agg.queue_size()));
        hooks.corrupt(*batch);
        auto ack = hooks.dispatch ? hooks.dispatch(*batch, now) : std::nullopt;
        if (!ack) continue;
        if (hooks.drop_ack(0, agg.id())) {
            hooks.log(now, agg.id(), "ACK_LOST", "from=dispatch");
            continue;
        }
        agg.on_ack(*ack);
    }
}

}  // namespace hazmat::net
