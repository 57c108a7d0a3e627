#pragma once

#include <stdexcept>
#include <string>

namespace shapelab {

enum class ErrorCode {
    Validation,
    BallOutsideGrid,
    ScaleBelowGrid,
    MissingDerivatives,
    EmptyDomain,
    NoConvergence,
    StepCollapse,
    NoDescent,
    NotHarmonic,
};

const char* error_name(ErrorCode c);

// Validation-type codes map to CLI exit status 2, the rest to 3.
bool is_numerical(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace shapelab
