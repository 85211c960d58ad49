/** @file errors.hpp
    @brief Exception hierarchy used across the library.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace c1shell {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user input (bad file, bad flag, malformed geometry file).
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

/// Parameter outside its admissible range (degrees, regularity, mesh bounds).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

/// Evaluation outside the parametric domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Multi-patch connectivity problems: non-conforming interfaces, T-junctions,
/// inconsistent vertex fans or patch orientations.
class TopologyError : public Error {
public:
    explicit TopologyError(const std::string& msg) : Error(msg) {}
};

/// The geometry does not admit linear gluing data at an interface.
class NotASG1Error : public Error {
public:
    explicit NotASG1Error(const std::string& msg) : Error(msg) {}
};

/// Gluing functions exist but violate positivity on the interface.
class DegenerateGluingError : public Error {
public:
    explicit DegenerateGluingError(const std::string& msg) : Error(msg) {}
};

/// Singular parameterisation (rank-deficient Jacobian) at an evaluation point.
class SingularGeometryError : public Error {
public:
    explicit SingularGeometryError(const std::string& msg) : Error(msg) {}
};

/// Linear solver failure (singular or indefinite matrix, factorization breakdown).
class SolverError : public Error {
public:
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

/// Newton or continuation did not converge within the iteration budget.
class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

#define C1SHELL_REQUIRE(cond, exc, msg)                                        \
    do {                                                                       \
        if (!(cond)) throw exc(msg);                                           \
    } while (0)

} // namespace c1shell
