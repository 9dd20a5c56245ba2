#pragma once

#include <stdexcept>
#include <string>

namespace hby {

/// Bad or inconsistent configuration input (CLI maps this to exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Geometrically infeasible request, e.g. a pad spacing no layout can satisfy
/// (CLI maps this to exit code 3).
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hby
