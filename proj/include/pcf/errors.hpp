#ifndef PCF_ERRORS_HPP
#define PCF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pcf {

// Raised when a metric (or a metric block) fails to be positive definite
// within the configured floor.
struct PositivityError : std::runtime_error {
    explicit PositivityError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when componentwise lattice means of two (1,1)-forms differ beyond
// tolerance, i.e. their difference is not in the image of dbar + d on
// periodic forms.
struct MeanMismatchError : std::runtime_error {
    explicit MeanMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an input that must be ddbar-closed is not.
struct NotPluriclosedError : std::runtime_error {
    explicit NotPluriclosedError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedError : std::runtime_error {
    explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pcf

#endif
