#pragma once

#include <stdexcept>

namespace fraudrl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (layer sizes, rates, window lengths, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Dimension mismatch between tensors, networks, or cached activations.
struct ShapeError : Error {
  using Error::Error;
};

// Input values outside the documented domain (negative amounts, rates
// outside [0,1], empty datasets, ...).
struct InputError : Error {
  using Error::Error;
};

// API called out of order, e.g. stepping an exhausted stream.
struct SequenceError : Error {
  using Error::Error;
};

// CSV ingestion problems: missing columns, empty files, bad labels.
struct IngestError : Error {
  using Error::Error;
};

// Checkpoint save/load failures: unreadable files, version mismatch,
// shape-inconsistent parameter arrays.
struct CheckpointError : Error {
  using Error::Error;
};

}  // namespace fraudrl
