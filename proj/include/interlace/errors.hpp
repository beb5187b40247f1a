#ifndef INTERLACE_ERRORS_HPP_
#define INTERLACE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace interlace {

/// Invalid user input (bad dimension, malformed set literal, out-of-range
/// parameter). The CLI maps this to exit code 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not meet its accuracy contract.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trajectory exceeded its step budget; the replica is discarded.
struct StepLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace interlace

#endif  // INTERLACE_ERRORS_HPP_
