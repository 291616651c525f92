#pragma once

#include <stdexcept>
#include <string>

namespace lgt {

enum class ErrorKind {
    InvalidOrder,
    InvalidGroup,
    InvalidRep,
    NotCyclic,
    OrderTooSmall,
    DegenerateSpectrum,
    WrongRegime,
    InvalidPair,
    Degree,
    NotACycle,
    NotClosed,
    Budget,
    Precondition,
    ConditioningOnNull,
    Normalization,
    Config,
};

const char* to_string(ErrorKind kind);

class LgtError : public std::runtime_error {
public:
    LgtError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace lgt
