#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hazmat/sim.hpp"

namespace hazmat::sim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(FaultKind kind) noexcept {
    switch (kind) {
    case FaultKind::Crash: return "CRASH";
    case FaultKind::GsmDown: return "GSM_DOWN";
    case FaultKind::LinkDown: return "LINK_DOWN";
    }
    return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(Errc::InvalidScenario, field + ": " + why);
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) invalid(path + key, "missing");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        invalid(path + key, "wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
    return obj.contains(key) ? get<T>(obj, key, path) : fallback;
}

std::pair<double, double> pair_of(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        invalid(path, "expected a [number, number] pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

FaultKind fault_kind(const std::string& s, const std::string& path) {
    if (s == "CRASH") return FaultKind::Crash;
    if (s == "GSM_DOWN") return FaultKind::GsmDown;
    if (s == "LINK_DOWN") return FaultKind::LinkDown;
    invalid(path, "unknown fault kind '" + s + "'");
}

bool valid_target(const std::string& target) {
    auto numeric_after = [&](std::string_view prefix) {
        if (target.rfind(prefix, 0) != 0 || target.size() == prefix.size()) return false;
        return target.find_first_not_of("0123456789", prefix.size()) == std::string::npos;
    };
    return target == "*" || numeric_after("truck:") || numeric_after("portal:");
}

}  // namespace

Scenario parse_scenario(std::string_view json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::InvalidScenario, std::string("JSON syntax at byte ") + std::to_string(e.byte) + ": " +
                                               e.what());
    }
    if (!doc.is_object()) invalid("<root>", "expected an object");

    Scenario s;
    s.seed = get<std::uint64_t>(doc, "seed", "");
    s.duration = get<double>(doc, "duration", "");
    s.tick_s = get_or<double>(doc, "tick_s", "", 0.1);
    s.aggregator_ratio = get_or<std::size_t>(doc, "aggregator_ratio", "", net::kDefaultRatio);
    s.read_range_m = get_or<double>(doc, "read_range_m", "", net::kDefaultReadRange);
    s.read_miss_prob = get_or<double>(doc, "read_miss_prob", "", 0.0);
    s.ack_loss_prob = get_or<double>(doc, "ack_loss_prob", "", 0.0);
    s.corrupt_prob = get_or<double>(doc, "corrupt_prob", "", 0.0);
    s.relay_backup = get_or<bool>(doc, "relay_backup", "", false);
    s.unit.speed_limit_kmh = get_or<double>(doc, "speed_limit", "", s.unit.speed_limit_kmh);

    const json road = get<json>(doc, "road", "");
    if (!road.is_array()) invalid("road", "expected an array of [lat, lon]");
    for (std::size_t i = 0; i < road.size(); ++i) {
        const auto [lat, lon] = pair_of(road[i], "road[" + std::to_string(i) + "]");
        s.road.push_back({lat, lon});
    }

    const json portals = get<json>(doc, "portals", "");
    if (!portals.is_array()) invalid("portals", "expected an array of positions");
    for (std::size_t i = 0; i < portals.size(); ++i) {
        if (!portals[i].is_number()) invalid("portals[" + std::to_string(i) + "]", "expected a number");
        s.portals.push_back(portals[i].get<double>());
    }

    const json trucks = get_or<json>(doc, "trucks", "", json::array());
    if (!trucks.is_array()) invalid("trucks", "expected an array");
    for (std::size_t i = 0; i < trucks.size(); ++i) {
        const std::string path = "trucks[" + std::to_string(i) + "].";
        const json& t = trucks[i];
        if (!t.is_object()) invalid(path, "expected an object");
        TruckSpec spec;
        spec.t_id = get<std::uint64_t>(t, "t_id", path);
        spec.card = get<std::string>(t, "card", path);
        spec.departure = get_or<double>(t, "departure", path, 0.0);
        const json profile = get<json>(t, "speed_profile", path);
        if (!profile.is_array() || profile.empty()) invalid(path + "speed_profile", "expected a non-empty array");
        for (std::size_t k = 0; k < profile.size(); ++k) {
            const auto [pt, kmh] = pair_of(profile[k], path + "speed_profile[" + std::to_string(k) + "]");
            spec.speed_profile.push_back({pt, kmh});
        }
        try {
            const fs::path card_path = fs::path(spec.card).is_absolute() ? fs::path(spec.card) : base_dir / spec.card;
            spec.card_blob = load_card_file(card_path);
        } catch (const Error& e) {
            invalid(path + "card", e.what());
        }
        s.trucks.push_back(std::move(spec));
    }

    const json faults = get_or<json>(doc, "faults", "", json::array());
    if (!faults.is_array()) invalid("faults", "expected an array");
    for (std::size_t i = 0; i < faults.size(); ++i) {
        const std::string path = "faults[" + std::to_string(i) + "].";
        const json& f = faults[i];
        Fault fault;
        fault.kind = fault_kind(get<std::string>(f, "kind", path), path + "kind");
        fault.target = get<std::string>(f, "target", path);
        fault.t_start = get<double>(f, "t_start", path);
        fault.t_end = get_or<double>(f, "t_end", path, fault.t_start);
        s.faults.push_back(std::move(fault));
    }

    validate_scenario(s);
    return s;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidScenario, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path());
}

void validate_scenario(const Scenario& s) {
    if (!(s.tick_s > 0)) invalid("tick_s", "must be positive");
    if (!(s.duration >= 0)) invalid("duration", "must be non-negative");
    if (s.aggregator_ratio < 1) invalid("aggregator_ratio", "must be at least 1");
    if (!(s.read_range_m > 0)) invalid("read_range_m", "must be positive");
    for (const auto& [name, p] : {std::pair{"read_miss_prob", s.read_miss_prob}, std::pair{"ack_loss_prob", s.ack_loss_prob},
                                  std::pair{"corrupt_prob", s.corrupt_prob}}) {
        if (!(p >= 0 && p < 1)) invalid(name, "probability must be in [0, 1)");
    }
    if (s.road.size() < 2) invalid("road", "needs at least two vertices");
    for (std::size_t i = 0; i < s.road.size(); ++i) {
        if (std::abs(s.road[i].lat) > 90 || std::abs(s.road[i].lon) > 180) {
            invalid("road[" + std::to_string(i) + "]", "coordinates out of range");
        }
    }
    const double length = RoadGeometry(s.road).length_m();
    for (std::size_t i = 0; i < s.portals.size(); ++i) {
        const std::string field = "portals[" + std::to_string(i) + "]";
        if (!(s.portals[i] >= 0 && s.portals[i] <= length)) {
            invalid(field, "position " + std::to_string(s.portals[i]) + " m outside road length " +
                               std::to_string(length) + " m");
        }
        if (i > 0 && s.portals[i] < s.portals[i - 1]) invalid(field, "positions must be ascending");
    }
    for (std::size_t i = 0; i < s.trucks.size(); ++i) {
        const std::string path = "trucks[" + std::to_string(i) + "].";
        const auto& t = s.trucks[i];
        for (std::size_t j = 0; j < i; ++j) {
            if (s.trucks[j].t_id == t.t_id) invalid(path + "t_id", "duplicate truck id");
        }
        if (t.speed_profile.empty()) invalid(path + "speed_profile", "empty");
        for (std::size_t k = 0; k < t.speed_profile.size(); ++k) {
            if (!(t.speed_profile[k].kmh >= 0)) invalid(path + "speed_profile", "negative speed");
            if (k > 0 && !(t.speed_profile[k].t > t.speed_profile[k - 1].t)) {
                invalid(path + "speed_profile", "times must be strictly increasing");
            }
        }
        HazmatCard card;
        try {
            card = decode_card(t.card_blob);
        } catch (const Error& e) {
            invalid(path + "card", e.what());
        }
        if (card.t_id != t.t_id) invalid(path + "card", "card t_id does not match the truck's t_id");
    }
    for (std::size_t i = 0; i < s.faults.size(); ++i) {
        const std::string path = "faults[" + std::to_string(i) + "].";
        const auto& f = s.faults[i];
        if (!valid_target(f.target)) invalid(path + "target", "expected '*', 'truck:<id>' or 'portal:<id>'");
        if (f.kind == FaultKind::Crash && f.target.rfind("truck:", 0) != 0) {
            invalid(path + "target", "CRASH needs a truck:<id> target");
        }
        if (!(f.t_start >= 0 && f.t_start <= f.t_end && f.t_end <= s.duration)) {
            invalid(path + "t_start", "window must satisfy 0 <= t_start <= t_end <= duration");
        }
    }
}

}  // namespace hazmat::sim
