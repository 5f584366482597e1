#pragma once

#include <stdexcept>
#include <string>

namespace fnet {

/// Precondition / dimension-contract violation.
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulation left the admissible state region; carries the Euler step index.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, int step)
        : std::runtime_error(msg), step_(step) {}
    [[nodiscard]] int step() const { return step_; }

private:
    int step_;
};

/// Exact computation requested above the configured size cap.
class SizeCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration; names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(field) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Filesystem / serialization failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fnet
