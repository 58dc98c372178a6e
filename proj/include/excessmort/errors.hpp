#pragma once

#include <stdexcept>
#include <string>

namespace excessmort {

/// Input data violates a schema, coverage or range rule.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace excessmort
