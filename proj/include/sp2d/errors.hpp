#pragma once

#include <stdexcept>
#include <string>

namespace sp2d {

class InvalidGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised before a step whose size violates the advective CFL bound.
class StepRejected : public std::runtime_error {
 public:
  StepRejected(const std::string& what, double max_speed)
      : std::runtime_error(what), max_speed_(max_speed) {}
  double max_speed() const { return max_speed_; }

 private:
  double max_speed_;
};

}  // namespace sp2d
