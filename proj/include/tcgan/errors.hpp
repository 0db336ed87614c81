#ifndef TCGAN_ERRORS_HPP
#define TCGAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tcgan {

/// Tensor shapes or sizes violate an operation's precondition.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad or missing input data: unreadable files, empty or undersized datasets.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or command-line usage.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss or statistic became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcgan

#endif  // TCGAN_ERRORS_HPP
