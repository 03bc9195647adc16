#pragma once

#include <stdexcept>
#include <string>

// Argument errors are reported as std::invalid_argument.
namespace rxt {

// A valid input that falls in a case the library does not implement.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// A computation budget (enumeration size, rejection attempts) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// The model is degenerate for the requested quantity (e.g. zero split rate).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rxt
