#pragma once

#include <stdexcept>
#include <string>

namespace pmcgd {

// Vector/matrix shapes that do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization failed: the matrix is not symmetric positive definite.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data could not be read or is malformed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fit could not be carried out (component death, underflow, failed restarts).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ComponentDeath : public FitError {
 public:
  ComponentDeath(int component, double size)
      : FitError("component " + std::to_string(component + 1) +
                 " has vanished (effective size " + std::to_string(size) + ")"),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

}  // namespace pmcgd
