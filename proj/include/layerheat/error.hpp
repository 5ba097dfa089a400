#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layerheat {

// Numeric values are part of the C ABI (see layerheat.h); append only.
enum class ErrorCode : int {
    kOk = 0,
    kInvalidArgument = 1,
    kNotSymmetric = 2,
    kNotElliptic = 3,
    kUnsupportedDimension = 4,
    kOnInterface = 5,
    kBranchAmbiguity = 6,
    kDegenerateDenominator = 7,
    kRegionMismatch = 8,
    kQuadratureNotConverged = 9,
    kContourLeavesDomain = 10,
    kUnsupportedGeometry = 11,
    kTruncationInsufficient = 12,
    kInterfaceNotOnGrid = 13,
    kSolveFailed = 14,
    kNoFiniteConstant = 15,
    kExponentMismatch = 16,
    kConfig = 17,
    kIo = 18,
    kInternal = 19,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace layerheat
