#pragma once

#include <stdexcept>
#include <string>

namespace fedbid {

// Invalid run configuration (bad key, out-of-range value, empty pool...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough history to fit or calibrate something.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (IDX container, CSV).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative fit blew up. `step()` is the 0-based step at which it was detected.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace fedbid
