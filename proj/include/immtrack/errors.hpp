#pragma once

#include <stdexcept>
#include <string>

namespace immtrack {

/// Covariance factorization failed even after jitter retries. The CLI maps
/// this to its own exit code so batch runs can tell numerical aborts from
/// bad inputs.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file or config. Message carries file/line context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace immtrack
