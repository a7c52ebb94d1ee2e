#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfgabs {

/// Argument outside the mathematical domain of an operation (l ∉ [0,1], u ∉ Γ, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid model or experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver detected instability, negative density, or a mass-balance failure.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A particle state became non-finite or left the blowup guard box.
class NumericalBlowup : public std::runtime_error {
public:
    NumericalBlowup(const std::string& what, std::size_t particle, std::size_t step)
        : std::runtime_error(what), particle_(particle), step_(step) {}

    std::size_t particle() const noexcept { return particle_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t particle_;
    std::size_t step_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mfgabs
