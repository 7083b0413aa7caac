#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wlnet {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `offset()` is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// NaN/Inf surfaced during a forward or backward pass, or a diverging loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace detail
}  // namespace wlnet
