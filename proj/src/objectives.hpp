#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"

namespace nsgld {

// Regularity profile of an objective: A/B bound the value and gradient at 0,
// M is the gradient Lipschitz constant, (m, b) the dissipativity pair,
// delta the relative stochastic-gradient noise level. R is derived.
struct RegularityConstants {
  double M = 0.0;
  double m = 0.0;
  double b = 0.0;
  double A = 0.0;
  double B = 0.0;
  double delta = 0.0;
  double R = 0.0;  // sqrt(b / m)

  void validate() const;  // positivity/range checks and R^2 == b/m to 1e-12
};

RegularityConstants make_constants(double M, double m, double b, double A,
                                   double B, double delta);

struct Dataset {
  std::vector<std::vector<double>> rows;  // n rows, p columns each
  std::vector<std::string> feature_names;

  int n() const { return static_cast<int>(rows.size()); }
  int p() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  // Unbiased gradient estimate. batch_size == 0 means the full gradient.
  // The default consumes no random draws; minibatch objectives override.
  virtual Vector stochastic_gradient(const Vector& x, int batch_size,
                                     Rng& rng) const;

  virtual bool has_constants() const { return false; }
  virtual const RegularityConstants& constants() const;
};

// Tilted double well on R^2:
//   f(x) = 1/4 - ||x||^2/2 + <alpha, x>        for ||x|| <= 1/2,
//   f(x) = (||x|| - 1)^2/2 + <alpha, x>         otherwise.
// Value and gradient are continuous across the seam.
std::unique_ptr<Objective> double_well(const std::vector<double>& alpha);

// f(x) = ||x||^2 / 2 with exact constants M = m = 1, b = A = B = 0.
std::unique_ptr<Objective> isotropic_quadratic(int dim);

// Maximum-likelihood ICA on p-dimensional rows. State is the unmixing
// matrix W flattened row-major (dim = p^2); the per-sample loss is
//   -( sum_j log g'(w_j^T x_i) + log|det W| ),  g = logistic sigmoid,
// with w_j the j-th row of W. The objective is the dataset mean.
// A near-singular W raises a numeric error (degenerate state).
std::unique_ptr<Objective> ica_objective(Dataset data);

// Numeric CSV reader. Errors cite the 1-based line (and column) involved.
Dataset load_csv(const std::string& path, bool has_header);

struct SyntheticIca {
  Dataset data;     // rows x_i = mixing * s_i
  Matrix mixing;    // p x p, condition number <= 10 by construction
};

// Standard-logistic sources mixed by a random well-conditioned matrix.
SyntheticIca synthetic_ica_dataset(int n, int p, std::uint64_t seed);

// One regularity-inequality violation found by sampling.
struct RegularityViolation {
  std::string kind;  // "lower_bound", "upper_bound", "gradient", "dissipativity"
  Vector x;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct RegularityReport {
  long checked = 0;
  std::vector<RegularityViolation> violations;
  bool pass() const { return violations.empty(); }
};

// Samples points uniformly in the ball of the given radius and checks the
// registered constants against the defining inequalities:
//   m/3 ||x||^2 - (b/2) log 3  <=  f(x)  <=  M/2 ||x||^2 + B ||x|| + A,
//   ||grad f(x)|| <= M ||x|| + B,   <x, grad f(x)> >= m ||x||^2 - b.
RegularityReport verify_regularity(const Objective& obj, long n_samples,
                                   double radius, std::uint64_t seed);

}  // namespace nsgld
