#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hazmat/bytes.hpp"
#include "hazmat/crc.hpp"
#include "hazmat/card.hpp"
#include "oracles.hpp"

using namespace hazmat;

namespace {

HazmatCard methane() {
    HazmatCard c;
    c.c_id = 1000;
    c.t_id = 7;
    c.t_rn = "B-123-HAZ";
    c.op_id = 4201;
    c.op_name = "Carpathian Gas Transport SRL";
    c.op_phone = "+40212345678";
    c.s_id = "0000002C";
    c.comp_ids = {"0000002C", "0000002D"};
    c.exm_ids = {"0001", "0002"};
    c.tox_v = "00";
    c.kemler_no = "223";
    c.onu_no = "1972";
    c.et_ids = {"0001"};
    return c;
}

bool has_code(const std::vector<Violation>& v, Errc code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

// Recomputes the ECC after a deliberate edit so only the field rule is tested.
void reseal(CardBlob& blob) {
    const auto ecc = crc::compute_ecc(std::span(blob).first(kEccOffset));
    std::copy(ecc.begin(), ecc.end(), blob.begin() + kEccOffset);
}

}  // namespace

TEST(CardLayout, SlotsTileTheWholeTag) {
    std::size_t next = 0;
    for (const auto& s : kCardLayout) {
        EXPECT_EQ(s.offset, next) << s.name;
        next = s.offset + s.width;
        if (s.entry_width) {
            EXPECT_EQ(s.width % s.entry_width, 0u) << s.name;
        }
    }
    EXPECT_EQ(next, kCardSize);
    EXPECT_EQ(slot(FieldId::Ecc).offset, 504u);
    EXPECT_EQ(slot(FieldId::Reserved).width, 115u);
}

TEST(CardEncode, MethaneCodeLandsAtItsOffset) {
    const CardBlob blob = encode_card(methane());
    EXPECT_EQ(std::string(blob.begin() + 177, blob.begin() + 185), "0000002C");
    EXPECT_EQ(bytes::get_be<std::uint32_t>(std::span(blob).first(4)), 1000u);
}

TEST(CardEncode, MinimalCardIsAllZero) {
    const CardBlob blob = encode_card(HazmatCard{});
    EXPECT_TRUE(std::all_of(blob.begin(), blob.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST(CardEncode, OverlongOperatorNameOverflows) {
    HazmatCard c = methane();
    c.op_name = std::string(129, 'x');
    try {
        encode_card(c);
        FAIL() << "expected FieldOverflow";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::FieldOverflow);
    }
    c.op_name = std::string(128, 'x');
    EXPECT_NO_THROW(encode_card(c));
}

TEST(CardEncode, ListCapacityIsEnforced) {
    HazmatCard c = methane();
    c.comp_ids.assign(6, "0000002C");
    EXPECT_TRUE(has_code(validate_card(c), Errc::FieldOverflow));
    c.comp_ids.assign(5, "0000002C");
    c.exm_ids.assign(15, "0001");
    c.et_ids.assign(5, "0006");
    EXPECT_TRUE(validate_card(c).empty());
}

TEST(CardDecode, RoundTripsRandomCards) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 300; ++i) {
        const HazmatCard c = oracle::random_card(rng);
        ASSERT_TRUE(validate_card(c).empty()) << i;
        const CardBlob blob = encode_card(c);
        ASSERT_EQ(decode_card(blob), c) << i;
        ASSERT_EQ(encode_card(decode_card(blob)), blob) << i;
    }
}

TEST(CardDecode, FlippedNameByteIsEccMismatch) {
    CardBlob blob = encode_card(methane());
    blob[40] ^= 0x01;
    try {
        decode_card(blob);
        FAIL() << "expected EccMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EccMismatch);
    }
}

TEST(CardDecode, WrongLength) {
    const CardBlob blob = encode_card(methane());
    try {
        decode_card(std::span(blob).first(511));
        FAIL() << "expected WrongLength";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::WrongLength);
    }
}

TEST(CardDecode, NonZeroReservedIsRejected) {
    CardBlob blob = encode_card(methane());
    blob[400] = 0x5A;
    reseal(blob);
    const auto v = verify_blob(blob);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].code, Errc::NonZeroReserved);
    EXPECT_THROW(decode_card(blob), Error);
}

TEST(CardDecode, EntryAfterGapIsRejected) {
    CardBlob blob = encode_card(methane());
    // Move the second exm_id entry one slot further, leaving a hole.
    std::copy_n(blob.begin() + 239, 4, blob.begin() + 243);
    std::fill_n(blob.begin() + 239, 4, 0);
    reseal(blob);
    EXPECT_TRUE(has_code(verify_blob(blob), Errc::InvalidCode));
}

TEST(CardDecode, InteriorNulIsRejected) {
    CardBlob blob = encode_card(methane());
    blob[12 + 3] = 0;  // inside t_rn, followed by more text
    reseal(blob);
    EXPECT_TRUE(has_code(verify_blob(blob), Errc::InvalidAscii));
}

TEST(CardValidate, MethaneIsValid) { EXPECT_TRUE(validate_card(methane()).empty()); }

TEST(CardValidate, BadToxFlag) {
    HazmatCard c = methane();
    c.tox_v = "9Z";
    const auto v = validate_card(c);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].code, Errc::InvalidToxFlag);
}

TEST(CardValidate, ReportsEveryViolationTogether) {
    HazmatCard c = methane();
    c.op_phone = "+40abc";
    c.s_id = "GG";
    const auto v = validate_card(c);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].code, Errc::InvalidPhone);
    EXPECT_EQ(v[1].code, Errc::InvalidCode);
}

TEST(CardValidate, PhoneRule) {
    HazmatCard c = methane();
    for (const char* ok : {"+1", "+123456789012"}) {
        c.op_phone = ok;
        EXPECT_TRUE(validate_card(c).empty()) << ok;
    }
    for (const char* bad : {"+", "40212345678", "+1234567890123", "+12 34"}) {
        c.op_phone = bad;
        EXPECT_FALSE(validate_card(c).empty()) << bad;
    }
}

TEST(CardValidate, LowercaseCodeIsInvalid) {
    HazmatCard c = methane();
    c.s_id = "0000002c";
    EXPECT_TRUE(has_code(validate_card(c), Errc::InvalidCode));
}

TEST(CardVerify, ListsEccFirst) {
    CardBlob blob = encode_card(methane());
    blob[311] = '9';
    blob[312] = 'Z';
    const auto v = verify_blob(blob);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].code, Errc::EccMismatch);
    EXPECT_EQ(v[1].code, Errc::InvalidToxFlag);
}

TEST(CardDump, RoundTripsText) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
        const HazmatCard c = oracle::random_card(rng);
        const std::string dump = to_dump(c);
        ASSERT_EQ(parse_dump(dump), c) << dump;
        ASSERT_EQ(to_dump(parse_dump(dump)), dump);
    }
}

TEST(CardDump, ContainsMethaneCode) {
    const std::string dump = to_dump(methane());
    EXPECT_NE(dump.find("s_id: 0000002C\n"), std::string::npos);
    EXPECT_NE(dump.find("comp_ids: 0000002D\n"), std::string::npos);
}

TEST(CardDump, RejectsUnknownKey) {
    try {
        parse_dump(to_dump(methane()) + "colour: red\n");
        FAIL() << "expected MalformedDump";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedDump);
    }
}

TEST(CardFile, SaveAndLoad) {
    oracle::TempDir dir("card");
    const CardBlob blob = encode_card(methane());
    save_card_file(dir / "m.hmc", blob);
    EXPECT_EQ(load_card_file(dir / "m.hmc"), blob);
    EXPECT_EQ(read_binary_file(dir / "m.hmc").size(), kCardSize);
}
