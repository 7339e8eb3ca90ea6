#ifndef CLICKCRAFT_ERROR_HPP
#define CLICKCRAFT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace clickcraft {

// Malformed or unreadable configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameters outside an operation's domain (k > N, eta outside [0,1], ...).
class ValidationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Truncation or convergence failure, e.g. a Fock cutoff that is too small.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace clickcraft

#endif
