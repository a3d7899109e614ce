#pragma once

#include <stdexcept>
#include <string>

namespace gridsyn {

// Broad failure classes; the CLI maps each to its own exit code.
enum class ErrorKind { Config, Model, Solver, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define GRIDSYN_ERROR(Name, Kind)                                                  \
    class Name : public Error {                                                    \
    public:                                                                        \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}   \
    };

GRIDSYN_ERROR(ConfigError, Config)
GRIDSYN_ERROR(IoError, Io)
GRIDSYN_ERROR(DegenerateFlow, Model)
GRIDSYN_ERROR(IntegrationDiverged, Model)
GRIDSYN_ERROR(NonFiniteDerivative, Model)
GRIDSYN_ERROR(NoScaleGap, Model)
GRIDSYN_ERROR(EmptyGraph, Model)
GRIDSYN_ERROR(CardinalityMismatch, Model)
GRIDSYN_ERROR(SolverInfeasible, Solver)
GRIDSYN_ERROR(IncompleteLog, Model)

#undef GRIDSYN_ERROR

}  // namespace gridsyn
