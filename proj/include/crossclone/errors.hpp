#pragma once

#include <stdexcept>
#include <string>

namespace crossclone {

// Error taxonomy. The CLI maps each class to a distinct exit code.

// Bad user input: invalid flags, out-of-range config values, violated
// preconditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with data files or dataset contents: malformed lines, dangling
// references, duplicate ids, empty results.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// HTTP/network failures after the retry policy is exhausted.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace crossclone
