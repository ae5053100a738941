#pragma once

#include <stdexcept>
#include <string>

namespace fznet {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An input tensor violates an operation's shape/value preconditions.
struct ShapeError : Error {
    using Error::Error;
};

// Structurally invalid configuration (divisibility, widths, bad scheme, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Dataset files missing, truncated or holding corrupt records.
struct DataError : Error {
    using Error::Error;
};

// Checkpoint manifest and weight blob disagree.
struct CheckpointError : Error {
    using Error::Error;
};

// Training produced a non-finite loss or activation.
struct TrainingError : Error {
    using Error::Error;
};

}  // namespace fznet
