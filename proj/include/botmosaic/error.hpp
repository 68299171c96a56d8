#pragma once

#include <stdexcept>
#include <string>

namespace botmosaic {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range or malformed parameter value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Watermark parameters that cannot produce a valid insertion.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// A share column that cannot be spread over the captured flows.
class AllocationError : public Error {
public:
    using Error::Error;
};

/// Malformed key, trace or config file. Carries the offending line (0 if none).
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace botmosaic
