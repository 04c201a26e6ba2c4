#pragma once

#include <stdexcept>
#include <string>

namespace bohmrelax {

/// Failure categories. The numeric value doubles as the CLI exit status.
enum class ErrorCategory : int {
    Config = 2,
    Domain = 3,
    NodeProximity = 4,
    StepLimit = 5,
    CellUnresolvable = 6,
    Diagnostics = 7,
    Io = 8,
    InvalidArgument = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// A position lies outside the domain, or a Box trajectory came within
/// the wall tolerance.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::Domain, what) {}
};

/// |psi|^2 dropped below the node guard; the de Broglie velocity is not
/// usable there.
class NodeProximity : public Error {
public:
    explicit NodeProximity(const std::string& what)
        : Error(ErrorCategory::NodeProximity, what) {}
};

class StepLimitExceeded : public Error {
public:
    explicit StepLimitExceeded(const std::string& what)
        : Error(ErrorCategory::StepLimit, what) {}
};

/// More than half of a cell's quadrature points failed to backtrack.
class CellUnresolvable : public Error {
public:
    explicit CellUnresolvable(const std::string& what)
        : Error(ErrorCategory::CellUnresolvable, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

/// A value violates a type invariant (bad quantum number, unnormalized
/// wave, non-positive tolerance, ...).
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorCategory::InvalidArgument, what) {}
};

}  // namespace bohmrelax
