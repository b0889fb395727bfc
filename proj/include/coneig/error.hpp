///
/// \file error.hpp
///
/// Error codes and the exception type thrown by the C++ layer. The C API maps
/// each code onto an integer status (see coneig.h).
///
#ifndef CONEIG_ERROR_HPP
#define CONEIG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace coneig
{

enum class ErrorCode : int
{
    Ok                 = 0,
    InvalidArgument    = 1,
    CoincidentPoles    = 2,
    ZeroResidue        = 3,
    NotPositive        = 4,
    RankDeficient      = 5,
    NoConvergence      = 6,
    DeltaTooSmall      = 7,
    Breakdown          = 8,
    RootCountMismatch  = 9,
    Overflow           = 10,
    PrecisionExhausted = 11,
    Io                 = 12,
    Parse              = 13,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), m_code(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return m_code;
    }

private:
    ErrorCode m_code;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

} // namespace coneig

#endif /* CONEIG_ERROR_HPP */
