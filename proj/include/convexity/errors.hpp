#pragma once

#include <stdexcept>
#include <string>

namespace cvx {

/// Bad arguments or violated preconditions (dimension mismatches, invalid
/// region specs, non-orthogonal rotations, ...).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A request exceeded a configured resource cap (e.g. dense Hessian size).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Text input could not be parsed. Carries the 1-based line number.
struct ParseError : std::runtime_error {
    long line;
    ParseError(const std::string& msg, long line_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

/// Binary input violated the expected format. Carries the byte offset.
struct FormatError : std::runtime_error {
    long long offset;
    FormatError(const std::string& msg, long long offset_)
        : std::runtime_error(msg + " (byte offset " + std::to_string(offset_) + ")"),
          offset(offset_) {}
};

/// An integrated or trained trajectory blew up.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A probe that requires a critical point was handed a non-critical one.
struct NotACriticalPoint : InvalidInput {
    double grad_norm;
    NotACriticalPoint(const std::string& msg, double gn) : InvalidInput(msg), grad_norm(gn) {}
};

}  // namespace cvx
