#pragma once

#include <stdexcept>
#include <string>

namespace perfplan {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values: negative data sizes, non-positive costs,
// out-of-bound exponents, malformed configs.
struct DomainError : Error {
    using Error::Error;
};

// A requested performance level cannot be reached, or no feasible point
// exists inside the realizable region.
struct InfeasibleError : Error {
    using Error::Error;
};

// A coefficient is (numerically) zero and the requested closed form
// collapses: vertical isoperfs, axis-aligned expansion paths.
struct DegenerateError : Error {
    using Error::Error;
};

// Estimation failures: underdetermined data, rank deficiency,
// ill-conditioned kernel matrices.
struct FitError : Error {
    using Error::Error;
};

// File ingestion problems that prevent loading at all (missing file,
// missing required columns). Row-level issues are reported per row,
// not thrown.
struct IoError : Error {
    using Error::Error;
};

// Invalid or empty drawing specs.
struct RenderError : Error {
    using Error::Error;
};

} // namespace perfplan
