#pragma once

#include <stdexcept>
#include <string>

namespace fanet {

// Error categories map to CLI exit codes (config=2, io=3, internal=4).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace fanet
