#pragma once

#include <stdexcept>
#include <string>

namespace scle {

/// Base of every exception thrown by the library. `module()` names the
/// component that raised it so the CLI can print module-tagged messages.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-converged quadrature, invalid spectra, non-finite values.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Caller violated an API precondition (shape mismatch, too few samples...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A system model (basis, Hamiltonian, density matrix) is inconsistent.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Config document does not match the schema. `pointer()` is a JSON pointer.
class ParseError : public Error {
public:
    ParseError(const std::string& pointer, const std::string& what)
        : Error("cli", pointer + ": " + what), pointer_(pointer) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

/// Config parses but is semantically inconsistent.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Ensemble run failed (for example, too many rejected trajectories).
class RunError : public Error {
public:
    using Error::Error;
};

}  // namespace scle
