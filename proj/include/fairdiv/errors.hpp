#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fairdiv {

// Input document does not match the schema; path names the offending node.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Request exceeds a configured enumeration limit.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally invalid argument: bad allocation, family mismatch, dimension
// mismatch, violated precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A property that is proven to hold failed at runtime. Always a bug, never
// a user error.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fairdiv
