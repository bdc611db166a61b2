#include "hazmat/crc.hpp"

namespace hazmat::crc {
namespace {

constexpr std::uint64_t kPoly64 = 0x42F0E1EBA9EA3693ULL;
constexpr std::uint32_t kPoly32Reflected = 0xEDB88320U;  // 0x04C11DB7 bit-reversed

constexpr std::array<std::uint64_t, 256> make_table64() {
    std::array<std::uint64_t, 256> table{};
    for (std::uint64_t i = 0; i < 256; ++i) {
        std::uint64_t reg = i << 56;
        for (int bit = 0; bit < 8; ++bit) {
            reg = (reg & (1ULL << 63)) ? (reg << 1) ^ kPoly64 : reg << 1;
        }
        table[i] = reg;
    }
    return table;
}

constexpr std::array<std::uint32_t, 256> make_table32() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t reg = i;
        for (int bit = 0; bit < 8; ++bit) {
            reg = (reg & 1U) ? (reg >> 1) ^ kPoly32Reflected : reg >> 1;
        }
        table[i] = reg;
    }
    return table;
}

constexpr auto kTable64 = make_table64();
constexpr auto kTable32 = make_table32();

}  // namespace

std::uint64_t crc64_ecma(std::span<const std::uint8_t> data) noexcept {
    std::uint64_t reg = 0;
    for (std::uint8_t byte : data) {
        reg = kTable64[static_cast<std::uint8_t>(reg >> 56) ^ byte] ^ (reg << 8);
    }
    return reg;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept {
    std::uint32_t reg = 0xFFFFFFFFU;
    for (std::uint8_t byte : data) {
        reg = kTable32[static_cast<std::uint8_t>(reg) ^ byte] ^ (reg >> 8);
    }
    return reg ^ 0xFFFFFFFFU;
}

std::array<std::uint8_t, 8> compute_ecc(std::span<const std::uint8_t> data) noexcept {
    const std::uint64_t value = crc64_ecma(data);
    std::array<std::uint8_t, 8> out{};
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<std::uint8_t>(value >> (56 - 8 * i));
    }
    return out;
}

}  // namespace hazmat::crc
