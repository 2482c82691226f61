#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <vector>

namespace ddcd {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec24 = Eigen::Matrix<double, 24, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6x24 = Eigen::Matrix<double, 6, 24>;
using Mat24 = Eigen::Matrix<double, 24, 24>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Generalized coordinates per node: position followed by three directors.
inline constexpr int kNodeDofs = 12;
// Reduced (null-space) coordinates per node: translation and rotation.
inline constexpr int kNodeReducedDofs = 6;
// Strain / stress measures per element.
inline constexpr int kStrainDim = 6;
// Kinematic constraints per node.
inline constexpr int kNodeConstraints = 6;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or inconsistent dimensions.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Scenario validation failure carrying every detected problem.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Newton or KKT factorization failure.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iteration, std::vector<double> residual_history)
      : Error(what), iteration_(iteration), history_(std::move(residual_history)) {}
  int iteration() const { return iteration_; }
  const std::vector<double>& residual_history() const { return history_; }

 private:
  int iteration_;
  std::vector<double> history_;
};

inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace ddcd
