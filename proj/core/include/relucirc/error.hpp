#pragma once

#include <stdexcept>
#include <string>

namespace relucirc {

/// Caller passed something inconsistent: wrong dimension, empty set, bad path.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be parsed (bad magic, malformed JSON/CSV, wrong shape).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested computation exceeds its configured budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization diverged or failed to reach a required accuracy.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relucirc
