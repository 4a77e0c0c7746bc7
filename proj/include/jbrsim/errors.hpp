#pragma once

#include <stdexcept>
#include <string>

namespace jbrsim {

// Bad scenario file, bad CLI flag, bad formula input. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A simulation invariant broke mid-run. CLI exit code 2.
class InvariantViolation : public std::logic_error {
public:
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

} // namespace jbrsim
