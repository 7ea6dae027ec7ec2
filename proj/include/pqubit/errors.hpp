#pragma once

#include <stdexcept>
#include <string>

namespace pqubit {

/// Operand shapes do not fit together (wrong matrix size, bad qubit index).
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A parameter lies outside the domain where the model is defined.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace pqubit
