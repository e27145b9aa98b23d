#pragma once

#include <stdexcept>
#include <string>

namespace darnn {

// Error categories map 1:1 onto CLI exit codes:
// config=2, schema=3, numeric=4, io=5.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    using Error::Error;
};

// Dimension mismatch in tensor ops; a schema-class failure.
struct ShapeError : SchemaError {
    using SchemaError::SchemaError;
};

struct NumericError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace darnn
