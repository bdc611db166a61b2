#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hazmat::bytes {

template <typename UInt>
void put_be(std::span<std::uint8_t> out, UInt value) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        out[i] = static_cast<std::uint8_t>(value >> (8 * (sizeof(UInt) - 1 - i)));
    }
}

template <typename UInt>
UInt get_be(std::span<const std::uint8_t> in) {
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        value = static_cast<UInt>((value << 8) | in[i]);
    }
    return value;
}

// Append-style writer for variable-length wire payloads.
class Writer {
public:
    template <typename UInt>
    Writer& be(UInt value) {
        std::uint8_t tmp[sizeof(UInt)];
        put_be<UInt>(tmp, value);
        buf_.insert(buf_.end(), tmp, tmp + sizeof(UInt));
        return *this;
    }
    Writer& f64(double value) { return be(std::bit_cast<std::uint64_t>(value)); }
    Writer& raw(std::span<const std::uint8_t> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
        return *this;
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; `ok()` turns false on the first overrun and stays false.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    template <typename UInt>
    UInt be() {
        if (!need(sizeof(UInt))) return 0;
        UInt v = get_be<UInt>(data_.subspan(pos_));
        pos_ += sizeof(UInt);
        return v;
    }
    double f64() { return std::bit_cast<double>(be<std::uint64_t>()); }
    std::span<const std::uint8_t> raw(std::size_t n) {
        if (!need(n)) return {};
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    bool ok() const { return ok_; }
    bool done() const { return ok_ && pos_ == data_.size(); }

private:
    bool need(std::size_t n) {
        if (!ok_ || data_.size() - pos_ < n) {
            ok_ = false;
            return false;
        }
        return true;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

std::string to_hex(std::span<const std::uint8_t> data);
// Returns false on odd length or non-hex characters.
bool from_hex(std::string_view text, std::vector<std::uint8_t>& out);

}  // namespace hazmat::bytes
