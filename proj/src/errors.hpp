#pragma once

#include <stdexcept>
#include <string>

namespace bp {

// Bad user input: CLI flags, geometry parameters, machine files.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File format / read / write failures. Offset is byte position where known.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg, long long offset = -1)
        : std::runtime_error(offset >= 0 ? msg + " (at byte " + std::to_string(offset) + ")" : msg),
          offset_(offset) {}
    long long offset() const { return offset_; }

private:
    long long offset_;
};

// Data fails a documented invariant (w <= 0, dimension mismatch, ...).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bp
