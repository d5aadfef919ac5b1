#ifndef SDEFIT_ERRORS_HPP
#define SDEFIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sdefit {

/// Failure inside a dense linear-algebra kernel (e.g. overflow while
/// squaring a matrix exponential).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A filter run could not be completed (singular innovation covariance,
/// adaptive step underflow, non-finite state). Carries step context in the
/// message.
class FilterError : public std::runtime_error {
public:
  explicit FilterError(const std::string& what) : std::runtime_error(what) {}
};

/// The optimizer could not produce an estimate at all (every starting point
/// infeasible, empty data, ...).
class EstimationError : public std::runtime_error {
public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad model construction or registry lookup.
class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Config-file rejection; line is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& what, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what
                                       : what),
        line(line_no) {}
  int line;
};

} // namespace sdefit

#endif
