#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hazmat/events.hpp"
#include "hazmat/truck_unit.hpp"

// Frame layout (all integers big-endian):
//
//   0      4     5         7              7+len
//   +------+-----+---------+--------------+-----------+
//   | HMT1 | typ | len u16 | payload[len] | crc32 u32 |
//   +------+-----+---------+--------------+-----------+
//
// crc32 covers magic, type, len and payload.
namespace hazmat::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic{'H', 'M', 'T', '1'};
inline constexpr std::size_t kHeaderSize = 7;
inline constexpr std::size_t kTrailerSize = 4;
inline constexpr std::size_t kMaxPayload = 0xFFFF;

enum class MsgType : std::uint8_t { Alert = 0x01, ReadEvent = 0x02, Ack = 0x03, Batch = 0x04 };
std::string_view to_string(MsgType type) noexcept;

struct Frame {
    MsgType type;
    std::vector<std::uint8_t> payload;
};

using Bytes = std::vector<std::uint8_t>;

Bytes encode_frame(MsgType type, std::span<const std::uint8_t> payload);

// Throws CrcMismatch when only the checksum is wrong, MalformedFrame otherwise.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Total frame size announced by a header (needs kHeaderSize bytes).
// Throws MalformedFrame on bad magic or unknown type.
std::size_t frame_size_from_header(std::span<const std::uint8_t> header);

// --- payloads ---------------------------------------------------------------

inline constexpr std::size_t kReadEventPayloadSize = 4 + 4 + 4 + 8 + 8 + kCardSize;
inline constexpr std::size_t kAlertPayloadSize = 8 + 4 + 8 + 1 + 8 + 8 + 16 + kCardSize;
// Largest batch that still fits in one frame.
inline constexpr std::size_t kMaxBatchEvents = (kMaxPayload - 2) / (2 + kReadEventPayloadSize);

Bytes encode_read_event(const ReadEvent& event);
// Card problems throw CardDecodeFailure; layout problems throw MalformedFrame.
ReadEvent decode_read_event(std::span<const std::uint8_t> payload);
EventId peek_event_id(std::span<const std::uint8_t> payload);

Bytes encode_alert(const truck::AlertMessage& alert);
truck::AlertMessage decode_alert(std::span<const std::uint8_t> payload);
AlertKey peek_alert_key(std::span<const std::uint8_t> payload);

// Raw read-event payloads of a batch, in order. Throws MalformedFrame.
Bytes encode_batch(std::span<const ReadEvent> events);
std::vector<std::span<const std::uint8_t>> split_batch(std::span<const std::uint8_t> payload);

struct Ack {
    MsgType acked = MsgType::ReadEvent;
    std::vector<EventId> events;  // for ReadEvent / Batch
    std::vector<AlertKey> alerts; // for Alert

    friend bool operator==(const Ack&, const Ack&) = default;
};

Bytes encode_ack(const Ack& ack);
Ack decode_ack(std::span<const std::uint8_t> payload);

// Convenience: full frames.
inline Bytes read_event_frame(const ReadEvent& e) { return encode_frame(MsgType::ReadEvent, encode_read_event(e)); }
inline Bytes alert_frame(const truck::AlertMessage& a) { return encode_frame(MsgType::Alert, encode_alert(a)); }
inline Bytes batch_frame(std::span<const ReadEvent> es) { return encode_frame(MsgType::Batch, encode_batch(es)); }
inline Bytes ack_frame(const Ack& ack) { return encode_frame(MsgType::Ack, encode_ack(ack)); }

}  // namespace hazmat::wire
