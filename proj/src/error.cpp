#include "hazmat/error.hpp"

namespace hazmat {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::FieldOverflow: return "FieldOverflow";
    case Errc::InvalidAscii: return "InvalidAscii";
    case Errc::InvalidCode: return "InvalidCode";
    case Errc::InvalidToxFlag: return "InvalidToxFlag";
    case Errc::InvalidPhone: return "InvalidPhone";
    case Errc::WrongLength: return "WrongLength";
    case Errc::EccMismatch: return "EccMismatch";
    case Errc::NonZeroReserved: return "NonZeroReserved";
    case Errc::MalformedDump: return "MalformedDump";
    case Errc::MissingRoot: return "MissingRoot";
    case Errc::MalformedCode: return "MalformedCode";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::InvalidSample: return "InvalidSample";
    case Errc::InvalidState: return "InvalidState";
    case Errc::EmptyTopology: return "EmptyTopology";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::CardDecodeFailure: return "CardDecodeFailure";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::MalformedLog: return "MalformedLog";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace hazmat
