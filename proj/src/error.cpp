#include "coneig/error.hpp"

namespace coneig
{

const char* error_code_name(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::Ok:
        return "Ok";
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    case ErrorCode::CoincidentPoles:
        return "CoincidentPoles";
    case ErrorCode::ZeroResidue:
        return "ZeroResidue";
    case ErrorCode::NotPositive:
        return "NotPositive";
    case ErrorCode::RankDeficient:
        return "RankDeficient";
    case ErrorCode::NoConvergence:
        return "NoConvergence";
    case ErrorCode::DeltaTooSmall:
        return "DeltaTooSmall";
    case ErrorCode::Breakdown:
        return "Breakdown";
    case ErrorCode::RootCountMismatch:
        return "RootCountMismatch";
    case ErrorCode::Overflow:
        return "Overflow";
    case ErrorCode::PrecisionExhausted:
        return "PrecisionExhausted";
    case ErrorCode::Io:
        return "Io";
    case ErrorCode::Parse:
        return "Parse";
    }
    return "Unknown";
}

void raise(ErrorCode code, const std::string& what)
{
    throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

} // namespace coneig
