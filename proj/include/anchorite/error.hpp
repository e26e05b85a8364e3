#pragma once

#include <stdexcept>
#include <string>

namespace anchorite {

/// Bad input to a library call: a violated precondition or an invalid config value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Anchors that cannot pin down a position (collinear or coincident).
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace anchorite
