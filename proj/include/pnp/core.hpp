#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>
#include <string>

namespace pnp {

/// Nodal coefficient vector of a P1 function.
using Field = Eigen::VectorXd;

/// Row-major compressed sparse operator on Fields.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

using Triplet = Eigen::Triplet<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StencilError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ElectroneutralityError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class StepError : public Error {
 public:
  StepError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Entry (i, j) of a row-major sparse matrix, zero when not stored.
inline double entry(const SparseMatrix& a, int i, int j) {
  for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
    if (it.col() == j) return it.value();
    if (it.col() > j) break;
  }
  return 0.0;
}

}  // namespace pnp
