#pragma once

#include <stdexcept>
#include <string>

namespace oshe {

// One exception type per failure mode named in the module contracts.

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveH : std::runtime_error {
    explicit NonPositiveH(const std::string& what) : std::runtime_error(what) {}
};

struct LogDomainError : std::runtime_error {
    explicit LogDomainError(const std::string& what) : std::runtime_error(what) {}
};

struct DivergentIntegral : std::runtime_error {
    explicit DivergentIntegral(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::runtime_error {
    explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientPaths : std::runtime_error {
    explicit InsufficientPaths(const std::string& what) : std::runtime_error(what) {}
};

struct ExplodedField : std::runtime_error {
    explicit ExplodedField(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeDrift : std::runtime_error {
    explicit NegativeDrift(const std::string& what) : std::runtime_error(what) {}
};

struct ConditionsFailed : std::runtime_error {
    explicit ConditionsFailed(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace oshe
