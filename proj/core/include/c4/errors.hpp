#pragma once

#include <stdexcept>
#include <string>

namespace c4 {

// Base class for every error the library raises deliberately.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (non-positive illuminant, bad gamma, bad probability).
struct DomainError : Error {
    using Error::Error;
};

// Tensor shape or rank mismatch.
struct ShapeError : Error {
    using Error::Error;
};

// NaN/Inf produced by a numeric operation, or a diverged training run.
struct NumericError : Error {
    using Error::Error;
};

// Malformed files: manifests, model files, images.
struct FormatError : Error {
    using Error::Error;
};

// Inconsistent configuration (weight-length mismatch, empty dataset, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem-level failures.
struct IoError : Error {
    using Error::Error;
};

} // namespace c4
