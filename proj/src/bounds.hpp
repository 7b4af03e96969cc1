// Evaluators for the explicit non-asymptotic risk-bound constants: uniform
// moment bounds, exponential integrability, discretization error, the I0-I3
// terms of the empirical/population risk bounds, step-size caps, and the
// iteration/gradient-complexity counts. Formulas are evaluated exactly as
// printed in their closed forms, looseness included; nothing is tightened.
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nsgld {

// Full parameter tuple for the bound evaluators: smoothness M, dissipativity
// (m, b), gradient bound at zero (A, B), relative gradient-noise level delta,
// inverse temperature beta, dimension d, generator spectral gaps lambda_J and
// lambda_J0 (both negative, |lambda_J| >= |lambda_J0|), and ||I + J||.
// spectral_prefactor and universal_C are heuristic constants: the theory
// proves they exist but gives no value, so they are explicit inputs
// defaulting to 1 and tagged as heuristic in every report.
struct ProblemConstants {
  double M = 1.0;
  double m = 1.0;
  double b = 1.0;
  double A = 1.0;
  double B = 1.0;
  double delta = 0.0;
  double beta = 1.0;
  int d = 1;
  double lambda_J = -1.0;
  double lambda_J0 = -1.0;
  double norm_AJ = 1.0;
  double spectral_prefactor = 1.0;
  double universal_C = 1.0;

  double R() const;  // initialization radius sqrt(b/m)
  void validate() const;
};

// Uniform second/fourth moment constants for the continuous SDE (C_c), the
// discrete iterates (C_d), and the fourth-moment pair (D_c, U).
struct MomentConstants {
  double C_c = 0.0;
  double C_d = 0.0;
  double D_c = 0.0;
  double U = 0.0;
};
MomentConstants compute_moment_constants(const ProblemConstants& pc);

// Exponential-integrability constants L0, L1. Requires beta > 3/m: at
// beta = 3/m the (m - 3/beta) factor inside L1 is exactly zero and the
// evaluation fails loudly instead of dividing by zero.
struct ExpIntegrability {
  double L0 = 0.0;
  double L1 = 0.0;
};
ExpIntegrability compute_exp_integrability(const ProblemConstants& pc);

// One-step discretization constants C0, C1 and their hatted versions
// sqrt(16 log(L0+L1) (C + sqrt(C))). Errors when L0 + L1 <= 1 since the
// log must be positive.
struct DiscretizationConstants {
  double C0 = 0.0;
  double C1 = 0.0;
  double C0_hat = 0.0;
  double C1_hat = 0.0;
};
DiscretizationConstants compute_discretization_constants(
    const ProblemConstants& pc);

// Locally bounded spectral-comparison factor g_J(x). Doubly exponential in
// beta by construction, so the plain value may overflow; log_value is always
// computed stably and overflowed marks value == +infinity.
struct GJValue {
  double value = 0.0;
  double log_value = 0.0;
  bool overflowed = false;
};
GJValue compute_g_J(const ProblemConstants& pc, double x_norm,
                    double universal_C);
GJValue compute_g_J(const ProblemConstants& pc, double x_norm);

// Initialization-distance term of the risk bound, per unit epsilon; the
// caller multiplies by its epsilon. C_hat_zJ is the spectral prefactor times
// g_J evaluated at the initialization radius, or any directly supplied value.
double compute_I0(const ProblemConstants& pc, double C_hat_zJ);

// Discretization/ergodicity term at accuracy eps. k_eta is the continuous
// horizon (2/|lambda_J|) log(1/eps); the formula presumes k_eta >= e and
// horizon_ok records whether that held (value is still the literal
// evaluation when it did not).
struct I1Value {
  double value = 0.0;
  double k_eta = 0.0;
  bool horizon_ok = true;
};
I1Value compute_I1(const ProblemConstants& pc, double eps);

// Gibbs suboptimality term (d/(2 beta)) log(e M (b beta/d + 1)/m).
double compute_I2(const ProblemConstants& pc);

// Population-vs-empirical gap term, proportional to 1/n, using the
// logarithmic-Sobolev upper bound driven by the reversible gap lambda_J0.
double compute_I3(const ProblemConstants& pc, long n);

// Admissible step size: min of 1, the stability cap
// m^2/((m^2+8M^2) M ||A_J||^2), and the accuracy cap
// eps^4 lambda_J^2 / (4 log^2(1/eps) ||A_J||^4 lambda_J0^2).
double step_size_cap(const ProblemConstants& pc, double eps);

// Iterations to cover the horizon: ceil((2/|lambda_J|) log(1/eps) / eta).
// Returned as an integral double so astronomically loose inputs do not
// overflow an integer type.
double required_iterations(const ProblemConstants& pc, double eps, double eta);

// One named constant with the formula it was evaluated from.
struct BoundReportEntry {
  std::string key;
  double value = 0.0;
  std::string formula;
};

// Canonical evaluation of every constant for one (pc, eps, n) instance plus
// the summed risk bounds. Canonical keys come first in a fixed order;
// supplementary keys (log-domain g_J, tail-split constant, sums, flags)
// follow. Formula strings use semicolons instead of commas so the CSV stays
// quoting-free.
struct BoundReport {
  std::vector<BoundReportEntry> entries;
  std::string inputs;  // one-line echo of the evaluated parameter tuple
  bool g_overflowed = false;
  bool horizon_ok = true;

  double value(const std::string& key) const;  // errors on unknown key
  std::string to_csv() const;   // header key,value,formula_label
  std::string to_text() const;  // human-readable block with input echo
};

// C_hat_zJ: supply a positive value directly, or nullopt to derive it as
// spectral_prefactor * g_J(R).
BoundReport emit_bound_report(const ProblemConstants& pc, double eps, long n,
                              std::optional<double> C_hat_zJ = std::nullopt);

}  // namespace nsgld
