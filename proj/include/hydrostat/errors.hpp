#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydrostat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A compatibility constraint (vertical-mean divergence, mean-free data) is
/// violated; `defect()` is the measured violation.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, double defect)
      : Error(what + " (defect " + std::to_string(defect) + ")"), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or runaway amplitude detected at `time()`.
class BlowupDetected : public Error {
 public:
  explicit BlowupDetected(double time)
      : Error("blowup detected at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class ScheduleInfeasible : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace hydrostat
