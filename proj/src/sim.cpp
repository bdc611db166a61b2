#include "hazmat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "hazmat/metrics.hpp"
#include "hazmat/text.hpp"
#include "hazmat/wire.hpp"

namespace hazmat::sim {

namespace fs = std::filesystem;

// --- geometry ---------------------------------------------------------------

double haversine_m(const LatLon& a, const LatLon& b) noexcept {
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double dlat = (b.lat - a.lat) * kDeg;
    const double dlon = (b.lon - a.lon) * kDeg;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

RoadGeometry::RoadGeometry(std::vector<LatLon> polyline) : points_(std::move(polyline)) {
    if (points_.empty()) throw Error(Errc::InvalidScenario, "road: empty polyline");
    cumulative_.push_back(0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        cumulative_.push_back(cumulative_.back() + haversine_m(points_[i - 1], points_[i]));
    }
}

LatLon RoadGeometry::at(double position_m) const {
    if (position_m <= 0 || points_.size() == 1) return points_.front();
    if (position_m >= length_m()) return points_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), position_m);
    const std::size_t seg = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double span = cumulative_[seg + 1] - cumulative_[seg];
    const double f = span > 0 ? (position_m - cumulative_[seg]) / span : 0.0;
    const LatLon& a = points_[seg];
    const LatLon& b = points_[seg + 1];
    return {a.lat + f * (b.lat - a.lat), a.lon + f * (b.lon - a.lon)};
}

double speed_at(const std::vector<SpeedPoint>& profile, double t_rel) noexcept {
    if (profile.empty()) return 0;
    if (t_rel <= profile.front().t) return profile.front().kmh;
    if (t_rel >= profile.back().t) return profile.back().kmh;
    const auto it = std::upper_bound(profile.begin(), profile.end(), t_rel,
                                     [](double t, const SpeedPoint& p) { return t < p.t; });
    const SpeedPoint& b = *it;
    const SpeedPoint& a = *(it - 1);
    return a.kmh + (b.kmh - a.kmh) * (t_rel - a.t) / (b.t - a.t);
}

double accel_at(const std::vector<SpeedPoint>& profile, double t_rel) noexcept {
    if (profile.size() < 2 || t_rel < profile.front().t || t_rel >= profile.back().t) return 0;
    const auto it = std::upper_bound(profile.begin(), profile.end(), t_rel,
                                     [](double t, const SpeedPoint& p) { return t < p.t; });
    const SpeedPoint& b = *it;
    const SpeedPoint& a = *(it - 1);
    return (b.kmh - a.kmh) / 3.6 / (b.t - a.t);
}

std::pair<truck::GpsFix, truck::SensorSample> synthesize_streams(const RoadGeometry& road,
                                                                 const TruckKinematics& truck, double t) {
    const LatLon where = road.at(truck.position_m);
    truck::GpsFix fix{t, where.lat, where.lon, truck.speed_kmh};
    truck::SensorSample sample{t, {truck.accel_long, 0.0, kGravity}, 0.0};
    if (truck.spike_sample == 0) sample.accel.x = -kCrashSpike;
    if (truck.spike_sample == 1) sample.accel.x = kCrashSpike;
    return {fix, sample};
}

// --- tags -------------------------------------------------------------------

std::string_view to_string(Placement p) noexcept {
    switch (p) {
    case Placement::Front: return "FRONT";
    case Placement::LeftA: return "LEFT_A";
    case Placement::LeftB: return "LEFT_B";
    case Placement::RightA: return "RIGHT_A";
    case Placement::RightB: return "RIGHT_B";
    case Placement::Back: return "BACK";
    }
    return "?";
}

TagSet make_tag_set(const HazmatCard& card) {
    constexpr std::array<Placement, 6> kOrder{Placement::Front, Placement::LeftA, Placement::LeftB,
                                             Placement::RightA, Placement::RightB, Placement::Back};
    TagSet tags{};
    for (std::size_t i = 0; i < kOrder.size(); ++i) {
        HazmatCard copy = card;
        copy.c_id = card.c_id + static_cast<std::uint32_t>(i);
        tags[i] = Tag{kOrder[i], copy.c_id, encode_card(copy)};
    }
    return tags;
}

std::vector<net::VisibleTag> visible_tags(const net::TruckPose& truck, const ReaderPose& reader, double range_m,
                                          const TagSet& tags) {
    std::vector<net::VisibleTag> out;
    const double offset = (reader.position_m - truck.position_m) * truck.heading;
    if (std::abs(offset) > range_m) return out;

    const bool approaching = offset > kTruckHalfLength;
    const bool receding = offset < -kTruckHalfLength;

    // Upright, the left reader faces the left tags. On its side the truck
    // turns the other flank toward the reader.
    bool left_tags = false;
    bool right_tags = false;
    switch (reader.side) {
    case ReaderSide::Left: (truck.rolled_over ? right_tags : left_tags) = true; break;
    case ReaderSide::Right: (truck.rolled_over ? left_tags : right_tags) = true; break;
    case ReaderSide::Overhead: left_tags = truck.rolled_over; break;
    }

    for (const Tag& tag : tags) {
        bool seen = false;
        switch (tag.placement) {
        case Placement::Front: seen = approaching; break;
        case Placement::Back: seen = receding; break;
        case Placement::LeftA:
        case Placement::LeftB: seen = left_tags; break;
        case Placement::RightA:
        case Placement::RightB: seen = right_tags; break;
        }
        if (seen) out.push_back({tag.c_id, decode_card(tag.blob)});
    }
    return out;
}

// --- run --------------------------------------------------------------------

std::string SimResult::log_text() const {
    std::string out;
    for (const auto& line : log) out += line + "\n";
    return out;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool matches(const std::string& target, std::string_view prefix, std::uint64_t id) {
    return target == "*" || target == std::string(prefix) + ":" + std::to_string(id);
}

struct TruckState {
    const TruckSpec* spec;
    HazmatCard card;
    TagSet tags;
    truck::TruckUnit unit;
    double position_m = 0;
    bool departed = false;
    bool arrived = false;
    bool crashed = false;
    int spike_sample = -1;
    std::size_t next_crash = 0;  // index into this truck's crash faults
    std::vector<const Fault*> crashes;
};

class Runner {
public:
    explicit Runner(const Scenario& s) : s_(s), road_(s.road), rng_(s.seed) {
        result_.store = std::make_unique<dispatch::EventStore>();
        for (const auto& spec : s.trucks) {
            HazmatCard card = decode_card(spec.card_blob);
            TruckState ts{&spec, card, make_tag_set(card), truck::TruckUnit(spec.t_id, s.unit), 0, false, false, false, -1, 0, {}};
            for (const auto& f : s.faults) {
                if (f.kind == FaultKind::Crash && matches(f.target, "truck", spec.t_id)) ts.crashes.push_back(&f);
            }
            std::stable_sort(ts.crashes.begin(), ts.crashes.end(),
                             [](const Fault* a, const Fault* b) { return a->t_start < b->t_start; });
            trucks_.push_back(std::move(ts));
        }
        if (!s.portals.empty()) {
            auto portals = net::assign_topology(s.portals, s.aggregator_ratio);
            for (auto& p : portals) {
                p.set_read_range(s.read_range_m);
                if (p.kind() == net::PortalKind::Relay) p.set_backup_enabled(s.relay_backup);
            }
            network_.emplace(std::move(portals));
        }
        hooks_.link_up = [this](std::uint32_t id) { return !fault_active(FaultKind::LinkDown, "portal", id); };
        hooks_.gsm_up = [this](std::uint32_t id) { return !fault_active(FaultKind::GsmDown, "portal", id); };
        hooks_.drop_ack = [this](std::uint32_t, std::uint32_t) {
            return s_.ack_loss_prob > 0 && unit_draw(rng_) < s_.ack_loss_prob;
        };
        hooks_.corrupt = [this](wire::Bytes& frame) { maybe_corrupt(frame); };
        hooks_.dispatch = [this](std::span<const std::uint8_t> frame, double t) { return ingest(frame, t); };
        hooks_.log = [this](double t, std::uint32_t id, std::string_view kind, const std::string& detail) {
            log(t, "portal:" + std::to_string(id), kind, detail);
        };
    }

    SimResult run() {
        const auto ticks = static_cast<std::size_t>(std::llround(s_.duration / s_.tick_s));
        log(0, "sim", "START",
            "seed=" + std::to_string(s_.seed) + ",trucks=" + std::to_string(s_.trucks.size()) +
                ",portals=" + std::to_string(s_.portals.size()) + ",ticks=" + std::to_string(ticks));
        for (std::size_t i = 0; i < ticks; ++i) {
            now_ = static_cast<double>(i) * s_.tick_s;
            for (auto& ts : trucks_) step_truck(ts);
            observe_portals();
            if (network_) network_->step(now_, hooks_);
            for (auto& ts : trucks_) advance(ts);
        }
        finish(static_cast<double>(ticks) * s_.tick_s);
        return std::move(result_);
    }

private:
    void log(double t, const std::string& source, std::string_view kind, const std::string& detail) {
        result_.log.push_back(text::fixed(t) + "|" + source + "|" + std::string(kind) + "|" + detail);
    }

    static std::string truck_source(const TruckState& ts) { return "truck:" + std::to_string(ts.spec->t_id); }

    bool fault_active(FaultKind kind, std::string_view prefix, std::uint64_t id) const {
        return std::any_of(s_.faults.begin(), s_.faults.end(), [&](const Fault& f) {
            return f.kind == kind && now_ >= f.t_start && now_ < f.t_end && matches(f.target, prefix, id);
        });
    }

    void maybe_corrupt(wire::Bytes& frame) {
        if (s_.corrupt_prob <= 0 || frame.empty() || unit_draw(rng_) >= s_.corrupt_prob) return;
        const std::size_t at = rng_() % frame.size();
        frame[at] ^= static_cast<std::uint8_t>(1 + rng_() % 255);
    }

    std::optional<wire::Bytes> ingest(std::span<const std::uint8_t> frame, double t) {
        dispatch::IngestResult r;
        try {
            r = result_.store->ingest(frame, t);
        } catch (const Error& e) {
            log(t, "dispatch", "INGEST_MALFORMED", std::string(to_string(e.code())));
            return std::nullopt;
        }
        for (const auto& id : r.stored_events) log(t, "dispatch", "INGEST_READ", "key=" + to_string(id));
        for (const auto& k : r.stored_alerts) log(t, "dispatch", "INGEST_ALERT", "key=" + to_string(k));
        for (const auto& q : r.quarantined) log(t, "dispatch", "QUARANTINE", "key=" + q.key);
        if (r.duplicates > 0) log(t, "dispatch", "INGEST_DUP", "count=" + std::to_string(r.duplicates));
        return wire::ack_frame(r.ack);
    }

    bool on_road(const TruckState& ts) const { return ts.departed && !ts.arrived; }

    void step_truck(TruckState& ts) {
        const TruckSpec& spec = *ts.spec;
        const std::string src = truck_source(ts);
        if (!ts.departed && now_ >= spec.departure) {
            ts.departed = true;
            log(now_, src, "DEPART", "pos=" + text::fixed(ts.position_m));
        }

        if (on_road(ts)) {
            if (!ts.crashed && ts.next_crash < ts.crashes.size() && now_ >= ts.crashes[ts.next_crash]->t_start) {
                ++ts.next_crash;
                ts.crashed = true;
                ts.spike_sample = 0;
                log(now_, src, "CRASH_INJECT", "pos=" + text::fixed(ts.position_m));
            }
            const double t_rel = now_ - spec.departure;
            TruckKinematics k;
            k.position_m = ts.position_m;
            k.speed_kmh = ts.crashed ? 0.0 : speed_at(spec.speed_profile, t_rel);
            k.accel_long = ts.crashed ? 0.0 : accel_at(spec.speed_profile, t_rel);
            k.spike_sample = ts.spike_sample;
            const auto [fix, sample] = synthesize_streams(road_, k, now_);
            if (ts.spike_sample >= 0) ts.spike_sample = ts.spike_sample == 0 ? 1 : -1;

            handle(ts, ts.unit.ingest_fix(fix));
            handle(ts, ts.unit.ingest_sample(sample));
        }

        const bool gsm = !fault_active(FaultKind::GsmDown, "truck", spec.t_id);
        for (const auto& e : ts.unit.tick(now_, gsm)) {
            if (e.kind != truck::EffectKind::SendAlert || !ts.unit.pending_alert()) continue;
            const auto& alert = *ts.unit.pending_alert();
            log(now_, src, "ALERT_SENT", "seq=" + std::to_string(alert.seq_no));
            auto frame = wire::alert_frame(alert);
            maybe_corrupt(frame);
            const auto ack = ingest(frame, now_);
            if (!ack) continue;
            if (s_.ack_loss_prob > 0 && unit_draw(rng_) < s_.ack_loss_prob) {
                log(now_, src, "ACK_LOST", "from=dispatch");
                continue;
            }
            const auto decoded = wire::decode_ack(wire::decode_frame(*ack).payload);
            for (const auto& key : decoded.alerts) {
                if (key.unit_id == spec.t_id && ts.unit.acknowledge(key.seq_no)) {
                    log(now_, src, "ALERT_ACKED", "seq=" + std::to_string(key.seq_no));
                }
            }
        }
    }

    void handle(TruckState& ts, const truck::Effects& effects) {
        const std::string src = truck_source(ts);
        std::optional<HazmatCard> local;
        for (const auto& e : effects) {
            std::string detail(to_string(e.kind));
            if (!e.text.empty()) detail += ":" + e.text;
            log(now_, src, "EFFECT", detail);
            if (e.kind == truck::EffectKind::ReadLocalTag) {
                local = decode_card(ts.tags.front().blob);
            } else if (e.kind == truck::EffectKind::ComposeAlert && local) {
                const auto alert = ts.unit.compose_alert(*local);
                std::string where = alert.position
                                        ? text::fixed(alert.position->lat, 6) + "," + text::fixed(alert.position->lon, 6)
                                        : std::string("NOFIX");
                log(now_, src, "ALERT_COMPOSED", "seq=" + std::to_string(alert.seq_no) + ",pos=" + where);
            }
        }
    }

    void observe_portals() {
        if (!network_) return;
        auto& portals = network_->portals();
        for (std::size_t i = 0; i < portals.size(); ++i) {
            net::Portal& portal = portals[i];
            const ReaderPose reader{portal.position_m(), i % 2 == 0 ? ReaderSide::Left : ReaderSide::Right};
            for (auto& ts : trucks_) {
                if (!on_road(ts)) continue;
                const net::TruckPose pose{ts.spec->t_id, ts.position_m, +1, false};
                auto visible = visible_tags(pose, reader, portal.read_range_m(), ts.tags);
                if (!visible.empty() && s_.read_miss_prob > 0 && unit_draw(rng_) < s_.read_miss_prob) visible.clear();
                if (const auto event = portal.observe(pose, visible, now_)) {
                    log(now_, "portal:" + std::to_string(portal.id()), "READ_EVENT",
                        "key=" + to_string(event->id) + ",t_id=" + std::to_string(event->t_id));
                }
            }
        }
    }

    void advance(TruckState& ts) {
        if (!on_road(ts) || ts.crashed) return;
        const double v = speed_at(ts.spec->speed_profile, now_ - ts.spec->departure) / 3.6;
        ts.position_m += v * s_.tick_s;
        if (ts.position_m >= road_.length_m()) {
            ts.position_m = road_.length_m();
            ts.arrived = true;
            log(now_ + s_.tick_s, truck_source(ts), "ARRIVE", "pos=" + text::fixed(ts.position_m));
        }
    }

    void finish(double t_end) {
        if (network_) {
            for (const auto& p : network_->portals()) {
                const std::string src = "portal:" + std::to_string(p.id());
                for (const auto& id : p.queued()) log(t_end, src, "END_QUEUED", "key=" + to_string(id));
                for (const auto& r : p.backup_log()) log(t_end, src, "END_BACKUP", "key=" + to_string(r.event.id));
            }
            result_.portals = network_->portals();
        }
        for (auto& ts : trucks_) {
            ts.unit.flush_blackbox();
            if (const auto& pending = ts.unit.pending_alert()) {
                log(t_end, truck_source(ts), "END_PENDING_ALERT", "seq=" + std::to_string(pending->seq_no));
            }
            result_.trucks.push_back(TruckOutcome{ts.spec->t_id, ts.position_m, ts.crashed, ts.tags, ts.unit});
        }
        log(t_end, "sim", "END", "reads=" + std::to_string(result_.store->read_count()) +
                                     ",alerts=" + std::to_string(result_.store->alert_count()));
    }

    const Scenario& s_;
    RoadGeometry road_;
    std::mt19937_64 rng_;
    std::vector<TruckState> trucks_;
    std::optional<net::RoadNetwork> network_;
    net::LinkHooks hooks_;
    double now_ = 0;
    SimResult result_;
};

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
}

}  // namespace

SimResult run(const Scenario& scenario) {
    validate_scenario(scenario);
    return Runner(scenario).run();
}

void write_outputs(const SimResult& result, const fs::path& out_dir) {
    fs::create_directories(out_dir / "backup");
    fs::create_directories(out_dir / "blackbox");
    write_text(out_dir / "simlog.txt", result.log_text());
    write_text(out_dir / "dispatch.log", result.store->journal_text());
    write_text(out_dir / "metrics.txt", format_metrics(metrics(result.log)));
    for (const auto& p : result.portals) {
        write_text(out_dir / "backup" / ("portal_" + std::to_string(p.id()) + ".log"), p.backup_log_text());
    }
    for (const auto& t : result.trucks) {
        std::string text;
        for (const auto& line : t.unit.blackbox()) text += line + "\n";
        write_text(out_dir / "blackbox" / ("truck_" + std::to_string(t.t_id) + ".log"), text);
    }
}

}  // namespace hazmat::sim
