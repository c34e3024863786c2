#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractv {

// Validation failures use std::invalid_argument throughout.

/// The selected optimum of a search came from a solve that did not converge.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed (e.g. MAV increased over a nested ground).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::invalid_argument(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace fractv
