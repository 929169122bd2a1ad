#pragma once

#include <stdexcept>
#include <string>

namespace sparsetrain {

/// Precondition violated by an argument value (empty input, out-of-range ratio, NaN, ...).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Dimensions of two or more arguments do not agree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace sparsetrain
