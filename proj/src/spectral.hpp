// Metastable-rate machinery: saddle eigenvalue mu*, its non-reversible
// counterpart mu*_J, asymptotic barrier-crossing rates, the gradient
// complexity ratio with its outperformance threshold, and a dense
// finite-difference estimator of the generator spectral gap.
#pragma once

#include <string>

#include "linalg.hpp"
#include "objectives.hpp"

namespace nsgld {

// Hessian data at a saddle/minimum pair plus the energy barrier between them.
// hessian_at_saddle must have exactly one negative eigenvalue, hessian_at_min
// must be positive definite, barrier must be positive.
struct SaddleData {
  Matrix hessian_at_saddle;
  Matrix hessian_at_min;
  double barrier = 0.0;

  // Throws invalid_argument on shape/positivity violations. Eigenvalue
  // structure of hessian_at_saddle is checked by mu_star / mu_star_J.
  void validate() const;
};

enum class GapMethod { eyring_kramers_asymptotic, grid_generator };

// Spectral-gap estimate: lambda is the largest nonzero real part in the
// generator spectrum, always negative for a confining potential.
struct GapEstimate {
  double lambda = 0.0;
  GapMethod method = GapMethod::eyring_kramers_asymptotic;
  double beta = 0.0;
};

// Magnitude of the unique negative eigenvalue of a symmetric saddle Hessian.
// An eigenvalue counts as negative when it is < -1e-10 * ||L||; zero or two
// or more negatives raise a saddle-structure error.
double mu_star(const Matrix& hessian_at_saddle);

// Magnitude of the unique negative-real-part eigenvalue of (I+J) * L.
// The candidate must be real to |imag| <= 1e-8 * ||(I+J)L||; a complex pair
// is an error rather than a silent real-part projection. Reduces to mu_star
// when J = 0.
double mu_star_J(const Matrix& hessian_at_saddle, const AntisymmetricMatrix& j);

// Leading-order barrier-crossing rate
//   |lambda| = (mu / 2pi) * sqrt(det H_min / |det H_sad|) * exp(-beta*barrier)
// with mu = mu_star (j == nullptr) or mu_star_J. The multiplicative
// 1 + O(...) correction is dropped; the method tag records that.
GapEstimate eyring_kramers_rate(const SaddleData& saddle, double beta,
                                const AntisymmetricMatrix* j = nullptr);

// Gradient-complexity ratio (1 + ||J||^2)^4 * (mu_star / mu_star_J)^5.
// Values below 1 mean the non-reversible drift wins per gradient evaluation.
double complexity_ratio(const SaddleData& saddle, const AntisymmetricMatrix& j);

// Minimal lambda1 (in the normal form L = diag(-1, lambda1, ...) with a
// single rotation block of strength a1 dominating) for which the complexity
// ratio drops below 1: (1 + t^{2/5}) * (1 + t^{1/5}) with t = 1 + a1^2.
double outperform_threshold(double a1);

// Verdict string for a complexity ratio: "nsgld_favorable" (< 1),
// "sgld_favorable" (> 1), or "boundary" when |ratio - 1| <= 1e-9.
std::string ratio_verdict(double ratio);

// Uniform tensor grid [lo, hi]^d with n points per axis.
struct GridSpec {
  double lo = -6.0;
  double hi = 6.0;
  int n = 40;
};

// Dense finite-difference estimate of the generator spectral gap for
//   L u = -((I+J) grad F) . grad u + (1/beta) * laplacian u
// on [lo, hi]^d with reflecting boundaries (mirror ghost nodes), d <= 2,
// n <= 50 per axis. Second-order central differences throughout. The zero
// eigenvalue is identified by |lambda| < 1e-8 * ||L||_inf together with a
// near-constant eigenvector; the estimate is the largest real part among the
// remaining eigenvalues. Errors if no zero mode is found (box likely too
// small) or if a genuinely positive eigenvalue survives (grid too coarse).
GapEstimate grid_generator_gap(const Objective& potential,
                               const AntisymmetricMatrix& j, double beta,
                               const GridSpec& grid);

}  // namespace nsgld
