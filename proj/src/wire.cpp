#include "hazmat/wire.hpp"

#include <algorithm>

#include "hazmat/bytes.hpp"
#include "hazmat/crc.hpp"

namespace hazmat {

std::string to_string(const EventId& id) {
    return std::to_string(id.portal_id) + ":" + std::to_string(id.c_id) + ":" + std::to_string(id.pass_no);
}

std::string to_string(const AlertKey& key) {
    return std::to_string(key.unit_id) + ":" + std::to_string(key.seq_no);
}

namespace wire {
namespace {

bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x04; }

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedFrame, what); }

void expect_done(const bytes::Reader& r, std::string_view what) {
    if (!r.done()) malformed(std::string(what) + " payload has wrong size");
}

HazmatCard card_from(std::span<const std::uint8_t> blob) {
    try {
        return decode_card(blob);
    } catch (const Error& e) {
        throw Error(Errc::CardDecodeFailure, e.what());
    }
}

}  // namespace

std::string_view to_string(MsgType type) noexcept {
    switch (type) {
    case MsgType::Alert: return "ALERT";
    case MsgType::ReadEvent: return "READ_EVENT";
    case MsgType::Ack: return "ACK";
    case MsgType::Batch: return "BATCH";
    }
    return "?";
}

Bytes encode_frame(MsgType type, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayload) malformed("payload of " + std::to_string(payload.size()) + " bytes");
    bytes::Writer w;
    w.raw(kMagic).be(static_cast<std::uint8_t>(type)).be(static_cast<std::uint16_t>(payload.size())).raw(payload);
    Bytes out = w.take();
    const std::uint32_t crc = crc::crc32(out);
    std::uint8_t trailer[4];
    bytes::put_be<std::uint32_t>(trailer, crc);
    out.insert(out.end(), trailer, trailer + 4);
    return out;
}

std::size_t frame_size_from_header(std::span<const std::uint8_t> header) {
    if (header.size() < kHeaderSize) malformed("short header");
    if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) malformed("bad magic");
    if (!known_type(header[4])) malformed("unknown message type " + std::to_string(header[4]));
    return kHeaderSize + bytes::get_be<std::uint16_t>(header.subspan(5)) + kTrailerSize;
}

Frame decode_frame(std::span<const std::uint8_t> data) {
    const std::size_t total = frame_size_from_header(data);
    if (data.size() != total) {
        malformed("frame is " + std::to_string(data.size()) + " bytes, header announces " + std::to_string(total));
    }
    const auto body = data.first(total - kTrailerSize);
    if (crc::crc32(body) != bytes::get_be<std::uint32_t>(data.subspan(total - kTrailerSize))) {
        throw Error(Errc::CrcMismatch, "frame checksum does not verify");
    }
    const auto payload = body.subspan(kHeaderSize);
    return Frame{static_cast<MsgType>(data[4]), Bytes(payload.begin(), payload.end())};
}

Bytes encode_read_event(const ReadEvent& event) {
    const CardBlob blob = encode_card(event.card);
    bytes::Writer w;
    w.be(event.id.portal_id).be(event.id.c_id).be(event.id.pass_no).f64(event.t).be(event.t_id).raw(blob);
    return w.take();
}

EventId peek_event_id(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    EventId id{r.be<std::uint32_t>(), r.be<std::uint32_t>(), r.be<std::uint32_t>()};
    if (!r.ok() || payload.size() != kReadEventPayloadSize) malformed("read event payload has wrong size");
    return id;
}

ReadEvent decode_read_event(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    ReadEvent e;
    e.id.portal_id = r.be<std::uint32_t>();
    e.id.c_id = r.be<std::uint32_t>();
    e.id.pass_no = r.be<std::uint32_t>();
    e.t = r.f64();
    e.t_id = r.be<std::uint64_t>();
    const auto blob = r.raw(kCardSize);
    expect_done(r, "read event");
    e.card = card_from(blob);
    return e;
}

Bytes encode_alert(const truck::AlertMessage& alert) {
    std::array<std::uint8_t, 16> code{};
    if (alert.alarm_code.size() > code.size()) malformed("alarm code too long");
    std::copy(alert.alarm_code.begin(), alert.alarm_code.end(), code.begin());
    const CardBlob blob = encode_card(alert.card);
    bytes::Writer w;
    w.be(alert.unit_id).be(alert.seq_no).f64(alert.t);
    w.be(static_cast<std::uint8_t>(alert.position ? 1 : 0));
    w.f64(alert.position ? alert.position->lat : 0.0).f64(alert.position ? alert.position->lon : 0.0);
    w.raw(code).raw(blob);
    return w.take();
}

AlertKey peek_alert_key(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    AlertKey key{r.be<std::uint64_t>(), r.be<std::uint32_t>()};
    if (!r.ok() || payload.size() != kAlertPayloadSize) malformed("alert payload has wrong size");
    return key;
}

truck::AlertMessage decode_alert(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    truck::AlertMessage a;
    a.unit_id = r.be<std::uint64_t>();
    a.seq_no = r.be<std::uint32_t>();
    a.t = r.f64();
    const auto has_pos = r.be<std::uint8_t>();
    const double lat = r.f64();
    const double lon = r.f64();
    const auto code = r.raw(16);
    const auto blob = r.raw(kCardSize);
    expect_done(r, "alert");
    if (has_pos > 1) malformed("position flag must be 0 or 1");
    if (has_pos) a.position = truck::Position{lat, lon};
    const auto nul = std::find(code.begin(), code.end(), std::uint8_t{0});
    a.alarm_code.assign(code.begin(), nul);
    a.card = card_from(blob);
    return a;
}

Bytes encode_batch(std::span<const ReadEvent> events) {
    if (events.size() > kMaxBatchEvents) malformed("batch of " + std::to_string(events.size()) + " events");
    bytes::Writer w;
    w.be(static_cast<std::uint16_t>(events.size()));
    for (const auto& e : events) {
        const Bytes p = encode_read_event(e);
        w.be(static_cast<std::uint16_t>(p.size())).raw(p);
    }
    return w.take();
}

std::vector<std::span<const std::uint8_t>> split_batch(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    const auto count = r.be<std::uint16_t>();
    std::vector<std::span<const std::uint8_t>> out;
    for (std::uint16_t i = 0; i < count && r.ok(); ++i) {
        const auto len = r.be<std::uint16_t>();
        out.push_back(r.raw(len));
    }
    expect_done(r, "batch");
    return out;
}

Bytes encode_ack(const Ack& ack) {
    bytes::Writer w;
    w.be(static_cast<std::uint8_t>(ack.acked));
    if (ack.acked == MsgType::Alert) {
        w.be(static_cast<std::uint16_t>(ack.alerts.size()));
        for (const auto& k : ack.alerts) w.be(k.unit_id).be(k.seq_no);
    } else {
        w.be(static_cast<std::uint16_t>(ack.events.size()));
        for (const auto& id : ack.events) w.be(id.portal_id).be(id.c_id).be(id.pass_no);
    }
    return w.take();
}

Ack decode_ack(std::span<const std::uint8_t> payload) {
    bytes::Reader r(payload);
    Ack ack;
    const auto type = r.be<std::uint8_t>();
    if (!known_type(type) || type == static_cast<std::uint8_t>(MsgType::Ack)) malformed("bad acked type");
    ack.acked = static_cast<MsgType>(type);
    const auto count = r.be<std::uint16_t>();
    for (std::uint16_t i = 0; i < count && r.ok(); ++i) {
        if (ack.acked == MsgType::Alert) {
            AlertKey k;
            k.unit_id = r.be<std::uint64_t>();
            k.seq_no = r.be<std::uint32_t>();
            ack.alerts.push_back(k);
        } else {
            EventId id;
            id.portal_id = r.be<std::uint32_t>();
            id.c_id = r.be<std::uint32_t>();
            id.pass_no = r.be<std::uint32_t>();
            ack.events.push_back(id);
        }
    }
    expect_done(r, "ack");
    return ack;
}

}  // namespace wire
}  // namespace hazmat
