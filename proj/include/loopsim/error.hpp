#pragma once

#include <stdexcept>
#include <string>

namespace loopsim {

// Invalid parameters or configuration files (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was called outside its contract (empty dataset, unknown
// checkpoint, series shorter than the window).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Model fitting produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state invariant did not hold; always a bug or corrupted input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace loopsim
