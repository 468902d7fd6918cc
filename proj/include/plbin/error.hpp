#pragma once

#include <stdexcept>
#include <string>

namespace plbin {

// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed input or schema violations.
class ValidationError : public Error {
public:
  using Error::Error;
};

// The data cannot support the requested computation.
class ComputationError : public Error {
public:
  using Error::Error;
};

// mle_binned with every observation in bin 0, or mle_continuous with every
// observation equal to x_m.
class EstimatorUndefined : public ComputationError {
public:
  using ComputationError::ComputationError;
};

// Too many bootstrap replicates collapsed into a single bin.
class DegenerateBinning : public ComputationError {
public:
  using ComputationError::ComputationError;
};

// A root finder or bisection could not bracket a solution.
class NoSolution : public ComputationError {
public:
  using ComputationError::ComputationError;
};

class IoError : public Error {
public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

} // namespace plbin
