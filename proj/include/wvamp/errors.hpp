#pragma once

#include <stdexcept>
#include <string>

namespace wvamp {

class InvalidDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The Taylor series of exp(G)v did not reach tolerance within the term budget.
// Usually means ||G v|| is not small: reduce the coupling or raise the cutoff.
class SeriesDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePostselection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedWeakValue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RegimeViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientCutoff : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridTooCoarse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wvamp
