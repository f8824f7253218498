#pragma once

#include <stdexcept>
#include <string>

namespace hctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Malformed or incomplete configuration / input arguments.
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// Operating point cannot be reached (steady-state quadratic has no real root).
class InfeasibleSetpoint : public Error {
   public:
    using Error::Error;
};

/// Solver did not converge, or a precondition on the spectrum failed.
class SolverError : public Error {
   public:
    using Error::Error;
};

/// Non-finite values or other numerical breakdown during simulation.
class NumericalError : public Error {
   public:
    NumericalError(const std::string& what, long record_index = -1)
        : Error(what), record_index_(record_index) {}
    long record_index() const { return record_index_; }

   private:
    long record_index_;
};

}  // namespace hctl
