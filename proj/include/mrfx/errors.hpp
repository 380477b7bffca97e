#pragma once

#include <stdexcept>
#include <string>

namespace mrfx {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes: parse/validation/capacity/contract -> 1, numerical -> 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries "<path>:<line>".
struct ParseError : Error {
    using Error::Error;
};

// A model invariant does not hold (negative prior, zero potential row, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Instance too large for an exact method.
struct CapacityError : Error {
    using Error::Error;
};

// A message or belief underflowed to all-zero.
struct NumericalError : Error {
    using Error::Error;
};

// A caller broke a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

} // namespace mrfx
