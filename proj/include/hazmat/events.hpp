#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "hazmat/card.hpp"

namespace hazmat {

// (portal_id, c_id, pass_no): unique per read event across a run.
struct EventId {
    std::uint32_t portal_id = 0;
    std::uint32_t c_id = 0;
    std::uint32_t pass_no = 0;

    friend auto operator<=>(const EventId&, const EventId&) = default;
};

std::string to_string(const EventId& id);  // "portal:c_id:pass"

// Alert identity for dispatch dedup.
struct AlertKey {
    std::uint64_t unit_id = 0;
    std::uint32_t seq_no = 0;

    friend auto operator<=>(const AlertKey&, const AlertKey&) = default;
};

std::string to_string(const AlertKey& key);  // "unit:seq"

// One truck passage observed by one portal.
struct ReadEvent {
    EventId id;
    double t = 0;
    std::uint64_t t_id = 0;
    HazmatCard card;

    friend bool operator==(const ReadEvent&, const ReadEvent&) = default;
};

}  // namespace hazmat
