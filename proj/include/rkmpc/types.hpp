#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rkmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inconsistent dimensions between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// A numerical procedure failed (singular system, iteration cap, divergence).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// A model or design assumption required by the control scheme does not hold.
class AssumptionError : public Error {
 public:
  explicit AssumptionError(const std::string& msg) : Error(msg) {}
};

/// The online optimization problem has no feasible point.
class InfeasibilityError : public Error {
 public:
  explicit InfeasibilityError(const std::string& msg) : Error(msg) {}
};

/// File or serialization failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace rkmpc
