#include "cdet/error.hpp"

namespace cdet {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::MissingField: return "MissingField";
    case Errc::BadTimestamp: return "BadTimestamp";
    case Errc::SourceUnavailable: return "SourceUnavailable";
    case Errc::BadUrl: return "BadUrl";
    case Errc::RedirectCycle: return "RedirectCycle";
    case Errc::DegenerateVector: return "DegenerateVector";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

} // namespace cdet
