#include "hazmat/card.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hazmat/bytes.hpp"
#include "hazmat/crc.hpp"

namespace hazmat {
namespace {

bool is_printable(char c) { return c >= 0x20 && c <= 0x7E; }

bool is_upper_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F'); }

void check_ascii(std::vector<Violation>& out, const FieldSlot& s, std::string_view value) {
    if (value.size() > s.width) {
        out.push_back({Errc::FieldOverflow, std::string(s.name),
                       std::to_string(value.size()) + " bytes exceeds slot of " + std::to_string(s.width)});
        return;
    }
    if (!std::all_of(value.begin(), value.end(), is_printable)) {
        out.push_back({Errc::InvalidAscii, std::string(s.name), "byte outside 0x20-0x7E"});
    }
}

void check_code(std::vector<Violation>& out, std::string_view field, std::string_view code, std::size_t width) {
    if (code.size() > width) {
        out.push_back({Errc::FieldOverflow, std::string(field),
                       "code '" + std::string(code) + "' longer than " + std::to_string(width)});
        return;
    }
    if (code.size() != width || !std::all_of(code.begin(), code.end(), is_upper_hex)) {
        out.push_back({Errc::InvalidCode, std::string(field),
                       "'" + std::string(code) + "' is not " + std::to_string(width) + " uppercase hex digits"});
    }
}

void check_code_list(std::vector<Violation>& out, const FieldSlot& s, const std::vector<std::string>& codes) {
    const std::size_t capacity = s.width / s.entry_width;
    if (codes.size() > capacity) {
        out.push_back({Errc::FieldOverflow, std::string(s.name),
                       std::to_string(codes.size()) + " entries exceeds capacity of " + std::to_string(capacity)});
    }
    for (const auto& code : codes) check_code(out, s.name, code, s.entry_width);
}

bool valid_phone(std::string_view phone) {
    if (phone.size() < 2 || phone.size() > 13 || phone.front() != '+') return false;
    return std::all_of(phone.begin() + 1, phone.end(), [](char c) { return c >= '0' && c <= '9'; });
}

const std::string& ascii_value(const HazmatCard& card, FieldId id) {
    switch (id) {
    case FieldId::TRn: return card.t_rn;
    case FieldId::OpName: return card.op_name;
    case FieldId::OpPhone: return card.op_phone;
    case FieldId::SId: return card.s_id;
    case FieldId::IgnP: return card.ign_p;
    case FieldId::SigTemp: return card.sig_temp;
    case FieldId::BPnt: return card.b_pnt;
    case FieldId::MPnt: return card.m_pnt;
    case FieldId::SDens: return card.s_dens;
    case FieldId::ToxV: return card.tox_v;
    case FieldId::KemlerNo: return card.kemler_no;
    case FieldId::OnuNo: return card.onu_no;
    default: break;
    }
    throw std::logic_error("not an ASCII slot");
}

std::string& ascii_value(HazmatCard& card, FieldId id) {
    return const_cast<std::string&>(ascii_value(std::as_const(card), id));
}

const std::vector<std::string>& list_value(const HazmatCard& card, FieldId id) {
    switch (id) {
    case FieldId::CompIds: return card.comp_ids;
    case FieldId::ExmIds: return card.exm_ids;
    case FieldId::EtIds: return card.et_ids;
    default: break;
    }
    throw std::logic_error("not a list slot");
}

std::vector<std::string>& list_value(HazmatCard& card, FieldId id) {
    return const_cast<std::vector<std::string>&>(list_value(std::as_const(card), id));
}

void write_ascii(std::span<std::uint8_t> dst, std::string_view value) {
    std::copy(value.begin(), value.end(), dst.begin());
}

// Reads a zero-padded ASCII slot. Bytes after the first 0x00 must all be 0x00.
std::string read_ascii(std::vector<Violation>& out, std::string_view field, std::span<const std::uint8_t> src) {
    const auto nul = std::find(src.begin(), src.end(), std::uint8_t{0});
    if (std::any_of(nul, src.end(), [](std::uint8_t b) { return b != 0; })) {
        out.push_back({Errc::InvalidAscii, std::string(field), "interior 0x00"});
    }
    std::string value(src.begin(), nul);
    if (!std::all_of(value.begin(), value.end(), is_printable)) {
        out.push_back({Errc::InvalidAscii, std::string(field), "byte outside 0x20-0x7E"});
    }
    return value;
}

bool all_zero(std::span<const std::uint8_t> s) {
    return std::all_of(s.begin(), s.end(), [](std::uint8_t b) { return b == 0; });
}

void parse_fields(std::span<const std::uint8_t> blob, HazmatCard& card, std::vector<Violation>& out) {
    for (const FieldSlot& s : kCardLayout) {
        const auto src = blob.subspan(s.offset, s.width);
        switch (s.kind) {
        case SlotKind::UInt:
            if (s.id == FieldId::CId) card.c_id = bytes::get_be<std::uint32_t>(src);
            if (s.id == FieldId::TId) card.t_id = bytes::get_be<std::uint64_t>(src);
            if (s.id == FieldId::OpId) card.op_id = bytes::get_be<std::uint64_t>(src);
            break;
        case SlotKind::Ascii:
        case SlotKind::Code:
            ascii_value(card, s.id) = read_ascii(out, s.name, src);
            break;
        case SlotKind::CodeList: {
            auto& list = list_value(card, s.id);
            list.clear();
            bool gap = false;
            for (std::size_t off = 0; off < s.width; off += s.entry_width) {
                const auto entry = src.subspan(off, s.entry_width);
                if (all_zero(entry)) {
                    gap = true;
                    continue;
                }
                if (gap) {
                    out.push_back({Errc::InvalidCode, std::string(s.name), "entry after an empty entry slot"});
                }
                list.push_back(read_ascii(out, s.name, entry));
            }
            break;
        }
        case SlotKind::Opaque:
            std::copy(src.begin(), src.end(), card.user_def.begin());
            break;
        case SlotKind::Reserved:
            if (!all_zero(src)) out.push_back({Errc::NonZeroReserved, "reserved", "reserved region is not zero"});
            break;
        case SlotKind::Ecc:
            break;
        }
    }
}

}  // namespace

const FieldSlot& slot(FieldId id) noexcept { return kCardLayout[static_cast<std::size_t>(id)]; }

std::vector<Violation> validate_card(const HazmatCard& card) {
    std::vector<Violation> out;
    for (const FieldSlot& s : kCardLayout) {
        switch (s.kind) {
        case SlotKind::Ascii: {
            const auto& value = ascii_value(card, s.id);
            const std::size_t before = out.size();
            check_ascii(out, s, value);
            if (out.size() != before) break;
            if (s.id == FieldId::ToxV && !value.empty() && value != "00" && value != "01") {
                out.push_back({Errc::InvalidToxFlag, "tox_v", "'" + value + "' is neither 00 nor 01"});
            }
            if (s.id == FieldId::OpPhone && !value.empty() && !valid_phone(value)) {
                out.push_back({Errc::InvalidPhone, "op_phone", "'" + value + "' is not '+' and 1-12 digits"});
            }
            break;
        }
        case SlotKind::Code:
            if (!card.s_id.empty()) check_code(out, s.name, card.s_id, s.entry_width);
            break;
        case SlotKind::CodeList:
            check_code_list(out, s, list_value(card, s.id));
            break;
        default:
            break;
        }
    }
    return out;
}

CardBlob encode_card(const HazmatCard& card) {
    if (auto v = validate_card(card); !v.empty()) {
        throw Error(v.front().code, v.front().field + ": " + v.front().detail);
    }
    CardBlob blob{};
    const std::span<std::uint8_t> out(blob);
    for (const FieldSlot& s : kCardLayout) {
        const auto dst = out.subspan(s.offset, s.width);
        switch (s.kind) {
        case SlotKind::UInt:
            if (s.id == FieldId::CId) bytes::put_be(dst, card.c_id);
            if (s.id == FieldId::TId) bytes::put_be(dst, card.t_id);
            if (s.id == FieldId::OpId) bytes::put_be(dst, card.op_id);
            break;
        case SlotKind::Ascii:
        case SlotKind::Code:
            write_ascii(dst, ascii_value(card, s.id));
            break;
        case SlotKind::CodeList: {
            const auto& list = list_value(card, s.id);
            for (std::size_t i = 0; i < list.size(); ++i) {
                write_ascii(dst.subspan(i * s.entry_width, s.entry_width), list[i]);
            }
            break;
        }
        case SlotKind::Opaque:
            std::copy(card.user_def.begin(), card.user_def.end(), dst.begin());
            break;
        case SlotKind::Reserved:
        case SlotKind::Ecc:
            break;
        }
    }
    const auto ecc = crc::compute_ecc(out.first(kEccOffset));
    std::copy(ecc.begin(), ecc.end(), blob.begin() + kEccOffset);
    return blob;
}

std::vector<Violation> verify_blob(std::span<const std::uint8_t> blob) {
    std::vector<Violation> out;
    if (blob.size() != kCardSize) {
        out.push_back({Errc::WrongLength, "blob", std::to_string(blob.size()) + " bytes, expected 512"});
        return out;
    }
    const auto ecc = crc::compute_ecc(blob.first(kEccOffset));
    if (!std::equal(ecc.begin(), ecc.end(), blob.begin() + kEccOffset)) {
        out.push_back({Errc::EccMismatch, "ecc",
                       "stored " + bytes::to_hex(blob.subspan(kEccOffset)) + ", computed " + bytes::to_hex(ecc)});
    }
    HazmatCard card;
    parse_fields(blob, card, out);
    // Field-level checks only make sense where parsing produced clean text.
    for (auto& v : validate_card(card)) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Violation& o) { return o.field == v.field; });
        if (!dup) out.push_back(std::move(v));
    }
    return out;
}

HazmatCard decode_card(std::span<const std::uint8_t> blob) {
    if (blob.size() != kCardSize) {
        throw Error(Errc::WrongLength, std::to_string(blob.size()) + " bytes, expected 512");
    }
    const auto ecc = crc::compute_ecc(blob.first(kEccOffset));
    if (!std::equal(ecc.begin(), ecc.end(), blob.begin() + kEccOffset)) {
        throw Error(Errc::EccMismatch, "stored checksum does not match contents");
    }
    HazmatCard card;
    std::vector<Violation> problems;
    parse_fields(blob, card, problems);
    if (problems.empty()) problems = validate_card(card);
    if (!problems.empty()) {
        throw Error(problems.front().code, problems.front().field + ": " + problems.front().detail);
    }
    return card;
}

std::string to_dump(const HazmatCard& card) {
    std::ostringstream os;
    auto line = [&os](std::string_view key, std::string_view value) {
        os << key << ':';
        if (!value.empty()) os << ' ' << value;
        os << '\n';
    };
    for (const FieldSlot& s : kCardLayout) {
        switch (s.kind) {
        case SlotKind::UInt:
            if (s.id == FieldId::CId) line(s.name, std::to_string(card.c_id));
            if (s.id == FieldId::TId) line(s.name, std::to_string(card.t_id));
            if (s.id == FieldId::OpId) line(s.name, std::to_string(card.op_id));
            break;
        case SlotKind::Ascii:
        case SlotKind::Code:
            line(s.name, ascii_value(card, s.id));
            break;
        case SlotKind::CodeList:
            for (const auto& code : list_value(card, s.id)) line(s.name, code);
            break;
        case SlotKind::Opaque:
            line(s.name, bytes::to_hex(card.user_def));
            break;
        case SlotKind::Reserved:
        case SlotKind::Ecc:
            break;
        }
    }
    return os.str();
}

namespace {

template <typename UInt>
UInt parse_uint(std::string_view key, std::string_view value) {
    UInt out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
        throw Error(Errc::MalformedDump, std::string(key) + ": '" + std::string(value) + "' is not an unsigned integer");
    }
    return out;
}

}  // namespace

HazmatCard parse_dump(std::string_view text) {
    HazmatCard card;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw Error(Errc::MalformedDump, "line " + std::to_string(line_no) + ": missing ':'");
        }
        const std::string_view key = line.substr(0, colon);
        std::string_view value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.remove_prefix(1);

        const auto it = std::find_if(kCardLayout.begin(), kCardLayout.end(),
                                     [&](const FieldSlot& s) { return s.name == key; });
        if (it == kCardLayout.end() || it->kind == SlotKind::Reserved || it->kind == SlotKind::Ecc) {
            throw Error(Errc::MalformedDump, "line " + std::to_string(line_no) + ": unknown field '" +
                                                 std::string(key) + "'");
        }
        switch (it->kind) {
        case SlotKind::UInt:
            if (it->id == FieldId::CId) card.c_id = parse_uint<std::uint32_t>(key, value);
            if (it->id == FieldId::TId) card.t_id = parse_uint<std::uint64_t>(key, value);
            if (it->id == FieldId::OpId) card.op_id = parse_uint<std::uint64_t>(key, value);
            break;
        case SlotKind::Ascii:
        case SlotKind::Code:
            ascii_value(card, it->id) = std::string(value);
            break;
        case SlotKind::CodeList:
            list_value(card, it->id).emplace_back(value);
            break;
        case SlotKind::Opaque: {
            std::vector<std::uint8_t> raw;
            if (!bytes::from_hex(value, raw) || raw.size() > kUserDefSize) {
                throw Error(Errc::MalformedDump, "user_def must be at most 80 hex digits");
            }
            card.user_def.fill(0);
            std::copy(raw.begin(), raw.end(), card.user_def.begin());
            break;
        }
        default:
            break;
        }
    }
    return card;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CardBlob load_card_file(const std::filesystem::path& path) {
    const auto raw = read_binary_file(path);
    if (raw.size() != kCardSize) {
        throw Error(Errc::WrongLength, path.string() + " holds " + std::to_string(raw.size()) + " bytes");
    }
    CardBlob blob{};
    std::copy(raw.begin(), raw.end(), blob.begin());
    return blob;
}

void save_card_file(const std::filesystem::path& path, const CardBlob& blob) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
}

}  // namespace hazmat
