#pragma once

#include <stdexcept>
#include <string>

namespace slt {

// Bad bytes on disk or on the wire (headers, counts, ranges).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that breaks a documented invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (missing key, out-of-range parameter, absent file).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Chat-completion transport failure, carries the last HTTP status (0 = no response).
class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& what)
        : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

}  // namespace slt
