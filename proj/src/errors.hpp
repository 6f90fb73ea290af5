#pragma once

#include <stdexcept>
#include <string>

namespace pinchfl {

// Invalid or out-of-range configuration; surfaces as exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A subcommand needs an artifact that an earlier subcommand has not
// produced yet; surfaces as exit code 3.
class DependencyError : public std::runtime_error {
public:
    explicit DependencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loss exceeded the configured cap; surfaces as exit code 4.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pinchfl
