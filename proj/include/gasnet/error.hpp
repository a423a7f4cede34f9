#pragma once

#include <stdexcept>
#include <string>

namespace gasnet {

/// Failure categories shared by every module. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidArgument,
    Topology,
    SingularDerivative,
    InfeasibleSteadyState,
    IntegrationFailure,
    NoPeriodicOrbit,
    NumericalFailure,
    Schema,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::SingularDerivative: return "singular-derivative";
    case ErrorKind::InfeasibleSteadyState: return "infeasible-steady-state";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::NoPeriodicOrbit: return "no-periodic-orbit";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Schema: return "schema";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

} // namespace detail

} // namespace gasnet
