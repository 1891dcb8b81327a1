#pragma once

#include <stdexcept>
#include <string>

namespace f2v {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error { using Error::Error; };
class PaletteMissError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class LoadError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class ScriptError : public Error { using Error::Error; };
class OverwriteError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };

}  // namespace f2v
