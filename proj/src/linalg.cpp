#include "linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "rng.hpp"

namespace nsgld {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite())
    fail(ErrorCode::invalid_argument, std::string(what) + ": non-finite entry");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    fail(ErrorCode::invalid_argument, std::string(what) + ": non-finite entry");
}

AntisymmetricMatrix::AntisymmetricMatrix(int dim) : dim_(dim) {
  if (dim < 1)
    fail(ErrorCode::invalid_argument, "antisymmetric matrix: dim must be >= 1");
  upper_.assign(static_cast<std::size_t>(dim) * (dim - 1) / 2, 0.0);
}

int AntisymmetricMatrix::index(int i, int j) const {
  // Row-major position within the strict upper triangle.
  return i * dim_ - i * (i + 1) / 2 + (j - i - 1);
}

double AntisymmetricMatrix::operator()(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
    fail(ErrorCode::invalid_argument, "antisymmetric matrix: index out of range");
  if (i == j) return 0.0;
  if (i < j) return upper_[index(i, j)];
  return -upper_[index(j, i)];
}

void AntisymmetricMatrix::set(int i, int j, double value) {
  if (!(0 <= i && i < j && j < dim_))
    fail(ErrorCode::invalid_argument,
         "antisymmetric matrix: set expects 0 <= i < j < dim");
  if (!std::isfinite(value))
    fail(ErrorCode::invalid_argument, "antisymmetric matrix: non-finite entry");
  upper_[index(i, j)] = value;
}

Matrix AntisymmetricMatrix::dense() const {
  Matrix m = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      double v = upper_[index(i, j)];
      m(i, j) = v;
      m(j, i) = -v;
    }
  return m;
}

Vector AntisymmetricMatrix::apply(const Vector& v) const {
  if (v.size() != dim_)
    fail(ErrorCode::invalid_argument, "antisymmetric matrix: size mismatch");
  Vector out = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      double e = upper_[index(i, j)];
      out[i] += e * v[j];
      out[j] -= e * v[i];
    }
  return out;
}

bool AntisymmetricMatrix::is_zero() const {
  for (double v : upper_)
    if (v != 0.0) return false;
  return true;
}

DriftMatrix::DriftMatrix(AntisymmetricMatrix j) : j_(std::move(j)) {
  j_norm_ = j_.is_zero() ? 0.0 : operator_norm(j_.dense());
  norm_ = operator_norm(dense());
}

Vector DriftMatrix::apply(const Vector& v) const { return v + j_.apply(v); }

Matrix DriftMatrix::dense() const {
  return Matrix::Identity(j_.dim(), j_.dim()) + j_.dense();
}

AntisymmetricMatrix block_diagonal_j(int dim, const std::vector<double>& a) {
  AntisymmetricMatrix j(dim);
  if (static_cast<int>(a.size()) != dim / 2)
    fail(ErrorCode::invalid_argument,
         "block_diagonal_j: expected " + std::to_string(dim / 2) +
             " block values, got " + std::to_string(a.size()));
  for (int k = 0; k < dim / 2; ++k) {
    if (!std::isfinite(a[k]))
      fail(ErrorCode::invalid_argument, "block_diagonal_j: non-finite block value");
    j.set(2 * k, 2 * k + 1, a[k]);
  }
  return j;
}

AntisymmetricMatrix random_gaussian_j(int dim, double tau, std::uint64_t seed) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    fail(ErrorCode::invalid_argument, "random_gaussian_j: tau must be >= 0");
  AntisymmetricMatrix j(dim);
  Rng rng(seed, StreamPurpose::drift, 0);
  double sigma = tau / dim;
  for (int i = 0; i < dim; ++i)
    for (int k = i + 1; k < dim; ++k) j.set(i, k, sigma * rng.gaussian());
  return j;
}

double operator_norm(const Matrix& m) {
  require_finite(m, "operator_norm");
  if (m.size() == 0) fail(ErrorCode::invalid_argument, "operator_norm: empty");
  // sqrt(lambda_max(M^T M)); the Gram matrix is symmetric so the solver is
  // exact to machine precision on the dominant eigenvalue.
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::numeric, "operator_norm: eigensolver did not converge");
  double top = es.eigenvalues().maxCoeff();
  return top <= 0.0 ? 0.0 : std::sqrt(top);
}

EigenDecomposition eigen_decomposition(const Matrix& m) {
  if (m.rows() != m.cols())
    fail(ErrorCode::invalid_argument, "eigenvalues: matrix must be square");
  if (m.rows() > 2500)
    fail(ErrorCode::invalid_argument, "eigenvalues: dim exceeds 2500");
  require_finite(m, "eigenvalues");
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::numeric, "eigenvalues: QR iteration did not converge");
  const double scale = m.norm();  // Frobenius
  const double tol = 1e-7 * (scale > 0.0 ? scale : 1.0);
  Eigen::MatrixXcd vecs = es.eigenvectors();
  Eigen::MatrixXcd mc = m.cast<std::complex<double>>();
  for (int k = 0; k < m.rows(); ++k) {
    Eigen::VectorXcd v = vecs.col(k);
    double residual = (mc * v - es.eigenvalues()[k] * v).norm() / v.norm();
    if (!(residual <= tol))
      fail(ErrorCode::numeric,
           "eigenvalues: residual " + std::to_string(residual) +
               " exceeds tolerance; eigensolve unreliable");
  }
  return {es.eigenvalues(), std::move(vecs)};
}

ComplexVector eigenvalues(const Matrix& m) {
  return eigen_decomposition(m).values;
}

}  // namespace nsgld
