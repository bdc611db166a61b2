#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace hazmat::crc {

// CRC-64/ECMA-182: poly 0x42F0E1EBA9EA3693, init 0, MSB-first, no final xor.
std::uint64_t crc64_ecma(std::span<const std::uint8_t> data) noexcept;

// CRC-32 (IEEE 802.3): poly 0x04C11DB7 reflected, init and final xor 0xFFFFFFFF.
std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept;

// Card ECC field: crc64_ecma as 8 big-endian bytes.
std::array<std::uint8_t, 8> compute_ecc(std::span<const std::uint8_t> data) noexcept;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace hazmat::crc
