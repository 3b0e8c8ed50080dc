#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace vibro
{

using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using RealSpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

using namespace std::complex_literals;

inline double angular(double f_hz) { return 2.0 * std::numbers::pi * f_hz; }

// Error hierarchy. The CLI maps these onto exit codes.
struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error
{
  using Error::Error;
};

struct GeometryError : Error
{
  using Error::Error;
};

struct SolverError : Error
{
  using Error::Error;
};

struct VerificationError : Error
{
  using Error::Error;
};

struct Point
{
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point &) const = default;
};

}  // namespace vibro
