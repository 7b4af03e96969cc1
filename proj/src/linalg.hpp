#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace nsgld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

// Antisymmetric matrix stored as its strict upper triangle (row-major),
// so J^T = -J holds by construction rather than by runtime checking.
class AntisymmetricMatrix {
 public:
  explicit AntisymmetricMatrix(int dim);

  int dim() const { return dim_; }

  // Entry (i, j); sign resolved from the stored triangle.
  double operator()(int i, int j) const;
  void set(int i, int j, double value);  // requires i < j

  Matrix dense() const;

  // Applies J to v without materializing the dense matrix.
  Vector apply(const Vector& v) const;

  const std::vector<double>& upper() const { return upper_; }
  bool is_zero() const;

 private:
  int index(int i, int j) const;  // position of (i, j), i < j, in upper_
  int dim_;
  std::vector<double> upper_;
};

// Drift matrix A_J = I + J with the operator norm cached at construction.
class DriftMatrix {
 public:
  explicit DriftMatrix(AntisymmetricMatrix j);

  int dim() const { return j_.dim(); }
  const AntisymmetricMatrix& j() const { return j_; }
  double norm() const { return norm_; }          // ||A_J||
  double j_norm() const { return j_norm_; }      // ||J||

  // (I + J) v computed as v + J v.
  Vector apply(const Vector& v) const;

  Matrix dense() const;  // I + J materialized

 private:
  AntisymmetricMatrix j_;
  double norm_;
  double j_norm_;
};

// J with 2x2 blocks [[0, a_k], [-a_k, 0]] along the diagonal; a trailing
// 1x1 zero block when dim is odd. a must have floor(dim/2) entries.
AntisymmetricMatrix block_diagonal_j(int dim, const std::vector<double>& a);

// Strict upper triangle filled with iid N(0, (tau/dim)^2), mirrored.
AntisymmetricMatrix random_gaussian_j(int dim, double tau, std::uint64_t seed);

// Largest singular value. Relative accuracy 1e-9 on well-scaled inputs.
double operator_norm(const Matrix& m);

struct EigenDecomposition {
  ComplexVector values;
  Eigen::MatrixXcd vectors;  // column k pairs with values[k]
};

// Full eigendecomposition of a square real matrix (dim <= 2500). Each
// returned eigenpair satisfies ||m v - lambda v|| <= 1e-7 ||m||_F;
// violations and solver non-convergence raise a numeric error rather than
// returning silently wrong values.
EigenDecomposition eigen_decomposition(const Matrix& m);

// Eigenvalues only, same contract.
ComplexVector eigenvalues(const Matrix& m);

// Shared validation helpers.
void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

}  // namespace nsgld
