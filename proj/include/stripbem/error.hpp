#pragma once

#include <stdexcept>
#include <string>

namespace stripbem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Topologically or geometrically invalid mesh input.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Solver breakdown, loss of definiteness, non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or problem setup (e.g. violated scaling condition).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stripbem
