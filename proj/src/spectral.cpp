#include "spectral.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nsgld {

namespace {

void require_square_symmetric(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    fail(ErrorCode::invalid_argument,
         std::string(what) + ": matrix must be square and nonempty");
  require_finite(m, what);
  const double scale = m.norm() > 0.0 ? m.norm() : 1.0;
  if ((m - m.transpose()).norm() > 1e-10 * scale)
    fail(ErrorCode::invalid_argument,
         std::string(what) + ": Hessian must be symmetric");
}

}  // namespace

void SaddleData::validate() const {
  require_square_symmetric(hessian_at_saddle, "saddle data");
  require_square_symmetric(hessian_at_min, "saddle data");
  if (hessian_at_min.rows() != hessian_at_saddle.rows())
    fail(ErrorCode::invalid_argument,
         "saddle data: saddle and minimum Hessians have different dimensions");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian_at_min,
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::numeric, "saddle data: eigensolve failed on hessian_at_min");
  if (!(es.eigenvalues().minCoeff() > 0.0))
    fail(ErrorCode::invalid_argument,
         "saddle data: Hessian at the minimum must be positive definite");
  if (!std::isfinite(barrier) || !(barrier > 0.0))
    fail(ErrorCode::invalid_argument,
         "saddle data: barrier must be positive and finite");
}

double mu_star(const Matrix& hessian_at_saddle) {
  require_square_symmetric(hessian_at_saddle, "mu_star");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian_at_saddle,
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::numeric, "mu_star: eigensolve failed");
  const double tol = 1e-10 * operator_norm(hessian_at_saddle);
  int negatives = 0;
  double magnitude = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] < -tol) {
      ++negatives;
      magnitude = -es.eigenvalues()[i];
    }
  }
  if (negatives != 1)
    fail(ErrorCode::saddle_structure,
         "mu_star: the saddle Hessian must have exactly one negative "
         "eigenvalue, found " +
             std::to_string(negatives));
  return magnitude;
}

double mu_star_J(const Matrix& hessian_at_saddle,
                 const AntisymmetricMatrix& j) {
  require_square_symmetric(hessian_at_saddle, "mu_star_J");
  if (j.dim() != hessian_at_saddle.rows())
    fail(ErrorCode::invalid_argument,
         "mu_star_J: J dimension " + std::to_string(j.dim()) +
             " does not match Hessian dimension " +
             std::to_string(hessian_at_saddle.rows()));
  // (I + J) L, the drift-twisted saddle Hessian.
  const Matrix twisted =
      hessian_at_saddle + j.dense() * hessian_at_saddle;
  const double scale = operator_norm(twisted);
  const ComplexVector evals = eigenvalues(twisted);
  const double neg_tol = 1e-10 * scale;
  int negatives = 0;
  std::complex<double> candidate{0.0, 0.0};
  for (int i = 0; i < evals.size(); ++i) {
    if (evals[i].real() < -neg_tol) {
      ++negatives;
      candidate = evals[i];
    }
  }
  if (negatives != 1)
    fail(ErrorCode::saddle_structure,
         "mu_star_J: (I+J)L must have exactly one eigenvalue with negative "
         "real part, found " +
             std::to_string(negatives));
  if (std::abs(candidate.imag()) > 1e-8 * scale)
    fail(ErrorCode::saddle_structure,
         "mu_star_J: the negative eigenvalue of (I+J)L is complex (imaginary "
         "part " +
             std::to_string(candidate.imag()) +
             "); the asymptotic rate formula requires a real eigenvalue");
  return -candidate.real();
}

GapEstimate eyring_kramers_rate(const SaddleData& saddle, double beta,
                                const AntisymmetricMatrix* j) {
  saddle.validate();
  if (!std::isfinite(beta) || !(beta > 0.0))
    fail(ErrorCode::invalid_argument,
         "eyring_kramers_rate: beta must be positive and finite");
  const double mu = (j != nullptr)
                        ? mu_star_J(saddle.hessian_at_saddle, *j)
                        : mu_star(saddle.hessian_at_saddle);
  const double det_min = saddle.hessian_at_min.determinant();
  const double det_sad = saddle.hessian_at_saddle.determinant();
  if (det_sad == 0.0)
    fail(ErrorCode::numeric,
         "eyring_kramers_rate: the saddle Hessian is singular");
  const double rate = mu / (2.0 * std::numbers::pi) *
                      std::sqrt(det_min / std::abs(det_sad)) *
                      std::exp(-beta * saddle.barrier);
  return {-rate, GapMethod::eyring_kramers_asymptotic, beta};
}

double complexity_ratio(const SaddleData& saddle,
                        const AntisymmetricMatrix& j) {
  saddle.validate();
  const double mu = mu_star(saddle.hessian_at_saddle);
  const double mu_j = mu_star_J(saddle.hessian_at_saddle, j);
  const double j_norm = operator_norm(j.dense());
  const double amp = 1.0 + j_norm * j_norm;
  return amp * amp * amp * amp * std::pow(mu / mu_j, 5.0);
}

double outperform_threshold(double a1) {
  if (!std::isfinite(a1) || a1 < 0.0)
    fail(ErrorCode::invalid_argument,
         "outperform_threshold: a1 must be nonnegative");
  const double t = 1.0 + a1 * a1;
  return (1.0 + std::pow(t, 0.4)) * (1.0 + std::pow(t, 0.2));
}

std::string ratio_verdict(double ratio) {
  if (std::abs(ratio - 1.0) <= 1e-9) return "boundary";
  return ratio < 1.0 ? "nsgld_favorable" : "sgld_favorable";
}

GapEstimate grid_generator_gap(const Objective& potential,
                               const AntisymmetricMatrix& j, double beta,
                               const GridSpec& grid) {
  const int d = potential.dim();
  if (d < 1 || d > 2)
    fail(ErrorCode::invalid_argument,
         "grid_generator_gap: potential dimension must be 1 or 2, got " +
             std::to_string(d));
  if (j.dim() != d)
    fail(ErrorCode::invalid_argument,
         "grid_generator_gap: J dimension does not match the potential");
  if (!std::isfinite(beta) || !(beta > 0.0))
    fail(ErrorCode::invalid_argument,
         "grid_generator_gap: beta must be positive and finite");
  if (!std::isfinite(grid.lo) || !std::isfinite(grid.hi) ||
      !(grid.hi > grid.lo))
    fail(ErrorCode::invalid_argument,
         "grid_generator_gap: box must satisfy lo < hi");
  if (grid.n < 4 || grid.n > 50)
    fail(ErrorCode::invalid_argument,
         "grid_generator_gap: points per axis must be in [4, 50], got " +
             std::to_string(grid.n));

  const int n = grid.n;
  const double h = (grid.hi - grid.lo) / (n - 1);
  const double inv_beta = 1.0 / beta;
  const int total = (d == 1) ? n : n * n;
  const DriftMatrix drift{j};

  // Mirror ghost: the out-of-range neighbor folds back across the face,
  // enforcing a zero normal derivative (no-flux boundary).
  const auto reflect = [n](int i) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };
  const auto flatten = [n, d](const std::vector<int>& idx) {
    return d == 1 ? idx[0] : idx[0] * n + idx[1];
  };

  Matrix gen = Matrix::Zero(total, total);
  std::vector<int> idx(d, 0);
  Vector x(d);
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    for (int k = d - 1; k >= 0; --k) {
      idx[k] = rem % n;
      rem /= n;
    }
    for (int k = 0; k < d; ++k) x[k] = grid.lo + idx[k] * h;
    // Advection velocity -(I+J) grad F at this node.
    const Vector v = -drift.apply(potential.gradient(x));
    gen(flat, flat) += -2.0 * d * inv_beta / (h * h);
    for (int k = 0; k < d; ++k) {
      std::vector<int> nb = idx;
      nb[k] = reflect(idx[k] + 1);
      const int plus = flatten(nb);
      nb[k] = reflect(idx[k] - 1);
      const int minus = flatten(nb);
      gen(flat, plus) += v[k] / (2.0 * h) + inv_beta / (h * h);
      gen(flat, minus) += -v[k] / (2.0 * h) + inv_beta / (h * h);
    }
  }

  const EigenDecomposition ed = eigen_decomposition(gen);
  const double scale = gen.cwiseAbs().rowwise().sum().maxCoeff();
  const double zero_tol = 1e-8 * scale;

  // The discrete generator annihilates constants exactly, so the zero mode
  // is the near-zero eigenvalue whose eigenvector is constant up to solver
  // noise. Magnitude alone is not enough: metastable potentials can push a
  // genuine relaxation eigenvalue underneath any fixed tolerance.
  std::vector<bool> zero_mode(static_cast<std::size_t>(total), false);
  bool found = false;
  for (int k = 0; k < total; ++k) {
    if (std::abs(ed.values[k]) >= zero_tol) continue;
    const Eigen::VectorXcd vec = ed.vectors.col(k);
    int arg = 0;
    for (int i = 1; i < total; ++i)
      if (std::abs(vec[i]) > std::abs(vec[arg])) arg = i;
    double deviation = 0.0;
    for (int i = 0; i < total; ++i)
      deviation = std::max(deviation, std::abs(vec[i] / vec[arg] - 1.0));
    if (deviation <= 1e-6) {
      zero_mode[static_cast<std::size_t>(k)] = true;
      found = true;
    }
  }
  if (!found)
    fail(ErrorCode::numeric,
         "grid_generator_gap: no zero eigenvalue with a constant eigenvector "
         "was identified; the box likely truncates too much Gibbs mass, try "
         "a wider [lo, hi]");

  double lambda = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < total; ++k)
    if (!zero_mode[static_cast<std::size_t>(k)])
      lambda = std::max(lambda, ed.values[k].real());
  if (!(lambda < 0.0))
    fail(ErrorCode::numeric,
         "grid_generator_gap: a nonnegative eigenvalue survives after "
         "removing the zero mode; refine the grid or shrink the box");
  return {lambda, GapMethod::grid_generator, beta};
}

}  // namespace nsgld
