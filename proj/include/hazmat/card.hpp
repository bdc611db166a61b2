#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazmat/error.hpp"

namespace hazmat {

inline constexpr std::size_t kCardSize = 512;
inline constexpr std::size_t kEccOffset = 504;
inline constexpr std::size_t kUserDefSize = 40;

using CardBlob = std::array<std::uint8_t, kCardSize>;

// Structured content of one hazard tag. Empty strings and short lists mean
// "absent"; on the tag they become zero bytes.
struct HazmatCard {
    std::uint32_t c_id = 0;
    std::uint64_t t_id = 0;
    std::string t_rn;
    std::uint64_t op_id = 0;
    std::string op_name;
    std::string op_phone;
    std::string s_id;
    std::vector<std::string> comp_ids;
    std::string ign_p;
    std::string sig_temp;
    std::vector<std::string> exm_ids;
    std::string b_pnt;
    std::string m_pnt;
    std::string s_dens;
    std::string tox_v;
    std::string kemler_no;
    std::string onu_no;
    std::vector<std::string> et_ids;
    std::array<std::uint8_t, kUserDefSize> user_def{};

    bool is_toxic() const { return tox_v == "01"; }

    friend bool operator==(const HazmatCard&, const HazmatCard&) = default;
};

enum class FieldId {
    CId, TId, TRn, OpId, OpName, OpPhone, SId, CompIds, IgnP, SigTemp, ExmIds,
    BPnt, MPnt, SDens, ToxV, KemlerNo, OnuNo, EtIds, UserDef, Reserved, Ecc,
};

enum class SlotKind { UInt, Ascii, Code, CodeList, Opaque, Reserved, Ecc };

struct FieldSlot {
    FieldId id;
    std::string_view name;
    SlotKind kind;
    std::size_t offset;
    std::size_t width;
    std::size_t entry_width;  // width of one code for Code/CodeList slots, else 0
};

// Tag memory map, in on-tag order. The slots tile [0, 512) with no gaps.
inline constexpr std::array<FieldSlot, 21> kCardLayout{{
    {FieldId::CId, "c_id", SlotKind::UInt, 0, 4, 0},
    {FieldId::TId, "t_id", SlotKind::UInt, 4, 8, 0},
    {FieldId::TRn, "t_rn", SlotKind::Ascii, 12, 16, 0},
    {FieldId::OpId, "op_id", SlotKind::UInt, 28, 8, 0},
    {FieldId::OpName, "op_name", SlotKind::Ascii, 36, 128, 0},
    {FieldId::OpPhone, "op_phone", SlotKind::Ascii, 164, 13, 0},
    {FieldId::SId, "s_id", SlotKind::Code, 177, 8, 8},
    {FieldId::CompIds, "comp_ids", SlotKind::CodeList, 185, 40, 8},
    {FieldId::IgnP, "ign_p", SlotKind::Ascii, 225, 5, 0},
    {FieldId::SigTemp, "sig_temp", SlotKind::Ascii, 230, 5, 0},
    {FieldId::ExmIds, "exm_ids", SlotKind::CodeList, 235, 60, 4},
    {FieldId::BPnt, "b_pnt", SlotKind::Ascii, 295, 4, 0},
    {FieldId::MPnt, "m_pnt", SlotKind::Ascii, 299, 4, 0},
    {FieldId::SDens, "s_dens", SlotKind::Ascii, 303, 8, 0},
    {FieldId::ToxV, "tox_v", SlotKind::Ascii, 311, 2, 0},
    {FieldId::KemlerNo, "kemler_no", SlotKind::Ascii, 313, 8, 0},
    {FieldId::OnuNo, "onu_no", SlotKind::Ascii, 321, 8, 0},
    {FieldId::EtIds, "et_ids", SlotKind::CodeList, 329, 20, 4},
    {FieldId::UserDef, "user_def", SlotKind::Opaque, 349, 40, 0},
    {FieldId::Reserved, "reserved", SlotKind::Reserved, 389, 115, 0},
    {FieldId::Ecc, "ecc", SlotKind::Ecc, 504, 8, 0},
}};

const FieldSlot& slot(FieldId id) noexcept;

struct Violation {
    Errc code;
    std::string field;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

// Every invariant violation of `card`, in layout order. Empty means valid.
std::vector<Violation> validate_card(const HazmatCard& card);

// Throws Error with the first violation if the card is invalid.
CardBlob encode_card(const HazmatCard& card);

// Verifies length and ECC first, then parses and validates every field.
HazmatCard decode_card(std::span<const std::uint8_t> blob);

// Like decode_card but collects every problem instead of stopping at the first.
// ECC problems come first.
std::vector<Violation> verify_blob(std::span<const std::uint8_t> blob);

// Text form: one `field_name: value` line per field in layout order; list
// fields repeat their key once per present entry.
std::string to_dump(const HazmatCard& card);
HazmatCard parse_dump(std::string_view text);

CardBlob load_card_file(const std::filesystem::path& path);
void save_card_file(const std::filesystem::path& path, const CardBlob& blob);

// Reads a file of any length; used where the length itself is under test.
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace hazmat
