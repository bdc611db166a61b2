#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hazmat {

enum class Errc {
    FieldOverflow,
    InvalidAscii,
    InvalidCode,
    InvalidToxFlag,
    InvalidPhone,
    WrongLength,
    EccMismatch,
    NonZeroReserved,
    MalformedDump,
    MissingRoot,
    MalformedCode,
    NonMonotonicTime,
    InvalidSample,
    InvalidState,
    EmptyTopology,
    CrcMismatch,
    MalformedFrame,
    CardDecodeFailure,
    InvalidRange,
    InvalidScenario,
    MalformedLog,
    Io,
};

std::string_view to_string(Errc code) noexcept;

// Every domain failure in the library is reported as a hazmat::Error carrying
// a stable code; the message holds the human-readable context.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace hazmat
