#ifndef SCTOMP_ERRORS_HPP
#define SCTOMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sctomp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input files.
struct ParseError : Error {
  using Error::Error;
};

// Structurally invalid data (infeasible region, broken chain, bad config).
struct ValidationError : Error {
  using Error::Error;
};

// Evaluation outside a function's domain.
struct DomainError : Error {
  using Error::Error;
};

// Parametric speed fell below the regularity threshold.
struct DegenerateCurveError : Error {
  using Error::Error;
};

// An optimization stage failed (infeasible, stalled, or rejected post-hoc).
struct SolveError : Error {
  using Error::Error;
};

}  // namespace sctomp

#endif
