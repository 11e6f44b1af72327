#pragma once

#include <stdexcept>
#include <string>

namespace lmprep {

// Base for all library errors. CLI maps these to nonzero exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable path, short write, malformed file.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input data; carries a 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Violated precondition or inconsistent configuration.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace lmprep
