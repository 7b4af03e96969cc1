#include "bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "format.hpp"

namespace nsgld {

namespace {

constexpr double kExpOverflow = 700.0;  // exp() still finite below this

void check_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0))
    fail(ErrorCode::invalid_argument,
         std::string("problem constants: ") + name + " must be > 0 and finite");
}

void check_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || !(v >= 0.0))
    fail(ErrorCode::invalid_argument,
         std::string("problem constants: ") + name + " must be >= 0 and finite");
}

void check_eps(double eps) {
  if (!std::isfinite(eps) || !(eps > 0.0) || !(eps < 1.0))
    fail(ErrorCode::invalid_argument, "eps must lie in (0, 1)");
}

// Shared beta >= 3/m gate for the exponential-integrability family.
void check_beta_floor(const ProblemConstants& pc, const char* what) {
  if (pc.beta * pc.m < 3.0)
    fail(ErrorCode::invalid_argument,
         std::string(what) + ": requires beta >= 3/m (got beta = " +
             format_double(pc.beta) + ", 3/m = " + format_double(3.0 / pc.m) +
             ")");
}

}  // namespace

double ProblemConstants::R() const { return std::sqrt(b / m); }

void ProblemConstants::validate() const {
  check_positive(M, "M");
  check_positive(m, "m");
  check_nonnegative(b, "b");
  check_nonnegative(A, "A");
  check_nonnegative(B, "B");
  if (!(delta >= 0.0 && delta < 1.0))
    fail(ErrorCode::invalid_argument,
         "problem constants: delta must lie in [0, 1)");
  check_positive(beta, "beta");
  if (d < 1)
    fail(ErrorCode::invalid_argument, "problem constants: d must be >= 1");
  if (!std::isfinite(lambda_J) || !(lambda_J < 0.0))
    fail(ErrorCode::invalid_argument,
         "problem constants: lambda_J must be < 0 and finite");
  if (!std::isfinite(lambda_J0) || !(lambda_J0 < 0.0))
    fail(ErrorCode::invalid_argument,
         "problem constants: lambda_J0 must be < 0 and finite");
  if (std::abs(lambda_J) < std::abs(lambda_J0))
    fail(ErrorCode::invalid_argument,
         "problem constants: |lambda_J| must be >= |lambda_J0| (adding J "
         "never shrinks the gap)");
  if (!std::isfinite(norm_AJ) || !(norm_AJ >= 1.0))
    fail(ErrorCode::invalid_argument,
         "problem constants: norm_AJ must be >= 1 (||I+J|| >= 1 always)");
  check_positive(spectral_prefactor, "spectral_prefactor");
  check_positive(universal_C, "universal_C");
}

MomentConstants compute_moment_constants(const ProblemConstants& pc) {
  pc.validate();
  const double log3 = std::log(3.0);
  const double R = pc.R();
  const double MB = pc.M + pc.B;
  const double m2 = pc.m * pc.m;
  const double m3 = m2 * pc.m;
  const double m4 = m3 * pc.m;
  const double inv_beta = 1.0 / pc.beta;
  MomentConstants out;
  out.C_c = (3.0 * pc.M * R * R + 3.0 * pc.B * R + 3.0 * pc.B + 6.0 * pc.A +
             3.0 * pc.b * log3) /
                (2.0 * pc.m) +
            3.0 * pc.b * MB / m2 + 6.0 * pc.M * inv_beta * pc.d * MB / m3;
  out.C_d = (3.0 * pc.M * R * R + 6.0 * pc.B * R + 3.0 * pc.B + 6.0 * pc.A +
             3.0 * pc.b * log3) /
                (2.0 * pc.m) +
            6.0 * pc.delta * (2.0 * pc.b * pc.M * pc.M + pc.B * pc.B * pc.m) *
                MB / m4 +
            12.0 * pc.M * inv_beta * pc.d * MB / m3 + 3.0 * pc.b * MB / m2;
  const double u_mid = pc.b + inv_beta + 2.0 * MB * inv_beta / m2;
  out.U = (pc.B + 2.0 * pc.A) * (pc.B + 2.0 * pc.A) / 2.0 +
          18.0 * MB * MB / m2 * u_mid * u_mid +
          24.0 * inv_beta * (2.0 * pc.b * pc.M * pc.M + pc.m * pc.B * pc.B) *
              MB * MB / m4 +
          2.0 * pc.b * pc.B + 2.0 * pc.A + pc.b * pc.b;
  const double quad = pc.M / 2.0 * R * R + pc.B * R + pc.A;
  out.D_c = 9.0 / m2 * quad * quad +
            (9.0 * out.U + 9.0 * pc.b * MB * out.C_c) / m2 +
            6.0 * pc.M * MB * MB / m3 *
                (pc.B + 2.0 * pc.B * std::sqrt(2.0 * pc.b / pc.m) +
                 2.0 * pc.b * pc.M / pc.m + 4.0 * pc.A) *
                inv_beta * pc.d;
  return out;
}

ExpIntegrability compute_exp_integrability(const ProblemConstants& pc) {
  pc.validate();
  check_beta_floor(pc, "exponential integrability");
  const double log3 = std::log(3.0);
  const double R = pc.R();
  const double MB = pc.M + pc.B;
  const double inv_beta = 1.0 / pc.beta;
  ExpIntegrability out;
  out.L0 = std::exp(pc.M * R * R / 2.0 + pc.B * R + pc.A +
                    3.0 * pc.b / (2.0 * pc.m) * log3);
  const double factor = pc.m - 3.0 * inv_beta;
  if (!(factor > 0.0))
    fail(ErrorCode::numeric,
         "L1: the factor (m - 3/beta) is " + format_double(factor) +
             "; beta = 3/m exactly makes it zero, L1 needs beta > 3/m");
  out.L1 = ((3.0 * pc.m - 9.0 * inv_beta) * (pc.B / 2.0 + pc.A) +
            3.0 * pc.b * MB) /
               (2.0 * MB) +
           (6.0 * inv_beta * pc.M * pc.d - 9.0 * pc.b * inv_beta) /
               (2.0 * pc.m) *
               std::exp(3.0 / pc.m *
                        (pc.B / 2.0 + pc.A +
                         MB / factor *
                             (pc.b + inv_beta * (2.0 * pc.M * pc.d -
                                                 3.0 * pc.b) /
                                         pc.m)));
  return out;
}

DiscretizationConstants compute_discretization_constants(
    const ProblemConstants& pc) {
  const MomentConstants mc = compute_moment_constants(pc);
  const ExpIntegrability ei = compute_exp_integrability(pc);
  const double sum = ei.L0 + ei.L1;
  if (!(sum > 1.0))
    fail(ErrorCode::numeric,
         "discretization constants: log(L0 + L1) needs L0 + L1 > 1, got " +
             format_double(sum));
  const double log_sum = std::log(sum);
  DiscretizationConstants out;
  out.C0 = 2.0 * pc.beta * pc.M * pc.M *
           (pc.M * pc.M * mc.C_d + pc.B * pc.B + pc.d / pc.beta);
  out.C1 = (1.0 + 2.0 * pc.M * pc.M) * pc.beta *
           (pc.M * pc.M * mc.C_d + pc.B * pc.B);
  out.C0_hat = std::sqrt(16.0 * log_sum * (out.C0 + std::sqrt(out.C0)));
  out.C1_hat = std::sqrt(16.0 * log_sum * (out.C1 + std::sqrt(out.C1)));
  return out;
}

GJValue compute_g_J(const ProblemConstants& pc, double x_norm,
                    double universal_C) {
  pc.validate();
  if (!std::isfinite(x_norm) || x_norm < 0.0)
    fail(ErrorCode::invalid_argument, "g_J: x_norm must be >= 0 and finite");
  if (!std::isfinite(universal_C) || !(universal_C > 0.0))
    fail(ErrorCode::invalid_argument, "g_J: universal_C must be > 0");
  const double log3 = std::log(3.0);
  const double MB = pc.M + pc.B;
  const double harnack =
      1.0 + pc.beta +
      (std::sqrt(pc.beta) + pc.beta) *
          (0.25 * pc.norm_AJ * (pc.M * x_norm + pc.M + pc.B) +
           std::sqrt(pc.d / pc.beta));
  const double log_inner =
      std::log(16.0) + std::lgamma(pc.d / 2.0 + 1.0) +
      pc.d / 2.0 * std::log(3.0 / (2.0 * pc.m * pc.beta)) +
      universal_C * std::pow(2.0, -3.0 * pc.d) * harnack * harnack +
      pc.beta * pc.b * log3 / 2.0 +
      pc.beta * MB * (x_norm * x_norm + pc.B / 2.0 + pc.A + 1.0 / 16.0);
  // log(1 + e^y): switch to the asymptote before exp(y) overflows.
  const double bridge = log_inner > kExpOverflow
                            ? log_inner
                            : std::log1p(std::exp(log_inner));
  GJValue out;
  out.log_value = 27.0 * std::abs(pc.lambda_J) / 64.0 + bridge;
  out.overflowed = out.log_value > kExpOverflow;
  out.value = out.overflowed ? std::numeric_limits<double>::infinity()
                             : std::exp(out.log_value);
  return out;
}

GJValue compute_g_J(const ProblemConstants& pc, double x_norm) {
  return compute_g_J(pc, x_norm, pc.universal_C);
}

double compute_I0(const ProblemConstants& pc, double C_hat_zJ) {
  pc.validate();
  if (!(C_hat_zJ > 0.0))
    fail(ErrorCode::invalid_argument, "I0: C_hat_zJ must be > 0");
  const MomentConstants mc = compute_moment_constants(pc);
  const double MB = pc.M + pc.B;
  return (MB / 2.0 + pc.B / 2.0 + pc.A) * C_hat_zJ + MB * mc.D_c;
}

I1Value compute_I1(const ProblemConstants& pc, double eps) {
  check_eps(eps);
  const MomentConstants mc = compute_moment_constants(pc);
  const DiscretizationConstants dc = compute_discretization_constants(pc);
  I1Value out;
  out.k_eta = 2.0 * std::log(1.0 / eps) / std::abs(pc.lambda_J);
  out.horizon_ok = out.k_eta >= std::exp(1.0);
  out.value = (pc.M * std::sqrt(mc.C_d) + pc.B) *
              (dc.C0_hat * eps / std::sqrt(std::abs(pc.lambda_J0)) +
               dc.C1_hat * std::pow(pc.delta, 0.25) * std::sqrt(out.k_eta) *
                   pc.norm_AJ) *
              std::sqrt(std::log(out.k_eta));
  return out;
}

double compute_I2(const ProblemConstants& pc) {
  pc.validate();
  return pc.d / (2.0 * pc.beta) *
         std::log(std::exp(1.0) * pc.M / pc.m *
                  (pc.b * pc.beta / pc.d + 1.0));
}

double compute_I3(const ProblemConstants& pc, long n) {
  pc.validate();
  if (n < 1)
    fail(ErrorCode::invalid_argument, "I3: sample size n must be >= 1");
  const double c_ls =
      (2.0 * pc.m * pc.m + 8.0 * pc.M * pc.M) /
          (pc.m * pc.m * pc.M * pc.beta) +
      1.0 / std::abs(pc.lambda_J0) *
          (6.0 * pc.M * (pc.d + pc.beta) / pc.m + 2.0);
  return 4.0 *
         (pc.M * pc.M / pc.m * (pc.b + pc.d / pc.beta) + pc.B * pc.B) *
         pc.beta * c_ls / static_cast<double>(n);
}

double step_size_cap(const ProblemConstants& pc, double eps) {
  pc.validate();
  check_eps(eps);
  const double stability =
      pc.m * pc.m /
      ((pc.m * pc.m + 8.0 * pc.M * pc.M) * pc.M * pc.norm_AJ * pc.norm_AJ);
  const double log_inv = std::log(1.0 / eps);
  const double aj2 = pc.norm_AJ * pc.norm_AJ;
  const double accuracy = std::pow(eps, 4.0) /
                          (4.0 * log_inv * log_inv * aj2 * aj2) *
                          (pc.lambda_J * pc.lambda_J) /
                          (pc.lambda_J0 * pc.lambda_J0);
  return std::min({1.0, stability, accuracy});
}

double required_iterations(const ProblemConstants& pc, double eps,
                           double eta) {
  pc.validate();
  check_eps(eps);
  if (!std::isfinite(eta) || !(eta > 0.0))
    fail(ErrorCode::invalid_argument,
         "required_iterations: eta must be > 0 and finite");
  const double k_eta = 2.0 / std::abs(pc.lambda_J) * std::log(1.0 / eps);
  return std::ceil(k_eta / eta);
}

double BoundReport::value(const std::string& key) const {
  for (const BoundReportEntry& e : entries)
    if (e.key == key) return e.value;
  fail(ErrorCode::invalid_argument, "bound report has no key '" + key + "'");
}

std::string BoundReport::to_csv() const {
  std::string out = "key,value,formula_label\n";
  for (const BoundReportEntry& e : entries) {
    out += e.key;
    out += ',';
    out += format_double(e.value);
    out += ',';
    out += e.formula;
    out += '\n';
  }
  return out;
}

std::string BoundReport::to_text() const {
  std::ostringstream os;
  os << "bound report\n  inputs: " << inputs << "\n";
  std::size_t width = 0;
  for (const BoundReportEntry& e : entries)
    width = std::max(width, e.key.size());
  for (const BoundReportEntry& e : entries) {
    os << "  " << e.key << std::string(width - e.key.size(), ' ') << " = "
       << format_double(e.value) << "\n      " << e.formula << "\n";
  }
  return os.str();
}

BoundReport emit_bound_report(const ProblemConstants& pc, double eps, long n,
                              std::optional<double> C_hat_zJ) {
  pc.validate();
  check_eps(eps);
  if (n < 1)
    fail(ErrorCode::invalid_argument,
         "bound report: sample size n must be >= 1");
  check_beta_floor(pc, "bound report");

  const MomentConstants mc = compute_moment_constants(pc);
  const ExpIntegrability ei = compute_exp_integrability(pc);
  const DiscretizationConstants dc = compute_discretization_constants(pc);
  const GJValue g = compute_g_J(pc, pc.R(), pc.universal_C);
  double c_hat;
  if (C_hat_zJ) {
    if (!(*C_hat_zJ > 0.0))
      fail(ErrorCode::invalid_argument,
           "bound report: supplied C_hat_zJ must be > 0");
    c_hat = *C_hat_zJ;
  } else {
    c_hat = pc.spectral_prefactor * g.value;
  }
  const double i0 = compute_I0(pc, c_hat) * eps;
  const I1Value i1 = compute_I1(pc, eps);
  const double i2 = compute_I2(pc);
  const double i3 = compute_I3(pc, n);
  const double eta_max = step_size_cap(pc, eps);
  const double k_req = required_iterations(pc, eps, eta_max);
  const double log_inv = std::log(1.0 / eps);
  const double k_j = std::sqrt(pc.beta) * (pc.beta + pc.d) /
                     (std::abs(pc.lambda_J) * std::pow(eps, 4.0)) *
                     log_inv * log_inv * log_inv *
                     std::pow(pc.norm_AJ, 4.0) *
                     (pc.lambda_J0 * pc.lambda_J0) /
                     (pc.lambda_J * pc.lambda_J);
  const double k_tail = std::exp(std::abs(pc.lambda_J) * i1.k_eta / 4.0);

  BoundReport rep;
  rep.g_overflowed = g.overflowed;
  rep.horizon_ok = i1.horizon_ok;
  rep.inputs = "M=" + format_double(pc.M) + " m=" + format_double(pc.m) +
               " b=" + format_double(pc.b) + " A=" + format_double(pc.A) +
               " B=" + format_double(pc.B) +
               " delta=" + format_double(pc.delta) +
               " beta=" + format_double(pc.beta) +
               " d=" + std::to_string(pc.d) +
               " lambda_J=" + format_double(pc.lambda_J) +
               " lambda_J0=" + format_double(pc.lambda_J0) +
               " norm_AJ=" + format_double(pc.norm_AJ) +
               " spectral_prefactor=" + format_double(pc.spectral_prefactor) +
               " (heuristic) universal_C=" + format_double(pc.universal_C) +
               " (heuristic) eps=" + format_double(eps) +
               " n=" + std::to_string(n);
  auto add = [&rep](const char* key, double value, const char* formula) {
    rep.entries.push_back({key, value, formula});
  };
  add("C_c", mc.C_c,
      "(3MR^2 + 3BR + 3B + 6A + 3b log3)/(2m) + 3b(M+B)/m^2 + "
      "6Md(M+B)/(beta m^3)");
  add("C_d", mc.C_d,
      "(3MR^2 + 6BR + 3B + 6A + 3b log3)/(2m) + "
      "6 delta (2bM^2 + B^2 m)(M+B)/m^4 + 12Md(M+B)/(beta m^3) + "
      "3b(M+B)/m^2");
  add("D_c", mc.D_c,
      "9(MR^2/2 + BR + A)^2/m^2 + (9U + 9b(M+B)C_c)/m^2 + "
      "6M(M+B)^2 (B + 2B sqrt(2b/m) + 2bM/m + 4A) d/(beta m^3)");
  add("U", mc.U,
      "(B+2A)^2/2 + 18(M+B)^2 (b + 1/beta + 2(M+B)/(beta m^2))^2/m^2 + "
      "24(2bM^2 + mB^2)(M+B)^2/(beta m^4) + 2bB + 2A + b^2");
  add("L0", ei.L0, "exp(MR^2/2 + BR + A + (3b/2m) log3)");
  add("L1", ei.L1,
      "((3m - 9/beta)(B/2 + A) + 3b(M+B))/(2(M+B)) + "
      "((6Md - 9b)/(2m beta)) exp((3/m)(B/2 + A + "
      "((M+B)/(m - 3/beta))(b + (2Md - 3b)/(beta m))))");
  add("C0", dc.C0, "2 beta M^2 (M^2 C_d + B^2 + d/beta)");
  add("C1", dc.C1, "(1 + 2M^2) beta (M^2 C_d + B^2)");
  add("C0_hat", dc.C0_hat, "sqrt(16 log(L0 + L1)(C0 + sqrt(C0)))");
  add("C1_hat", dc.C1_hat, "sqrt(16 log(L0 + L1)(C1 + sqrt(C1)))");
  add("I0", i0, "(((M+B)/2 + B/2 + A) C_hat_zJ + (M+B) D_c) eps");
  add("I1", i1.value,
      "(M sqrt(C_d) + B)(C0_hat eps/sqrt(|lambda_J0|) + "
      "C1_hat delta^(1/4) sqrt(2 log(1/eps)/|lambda_J|) ||A_J||) "
      "sqrt(log(2 log(1/eps)/|lambda_J|))");
  add("I2", i2, "(d/(2 beta)) log(e M (b beta/d + 1)/m)");
  add("I3", i3,
      "4 (M^2(b + d/beta)/m + B^2) beta c_LS/n; "
      "c_LS = (2m^2 + 8M^2)/(m^2 M beta) + (6M(d + beta)/m + 2)/|lambda_J0|");
  add("eta_max", eta_max,
      "min(1; m^2/((m^2 + 8M^2) M ||A_J||^2); "
      "eps^4 lambda_J^2/(4 log^2(1/eps) ||A_J||^4 lambda_J0^2))");
  add("k_required", k_req, "ceil((2/|lambda_J|) log(1/eps)/eta_max)");
  add("K_J", k_j,
      "sqrt(beta)(beta + d) log^3(1/eps) ||A_J||^4 lambda_J0^2/"
      "(|lambda_J| eps^4 lambda_J^2)");
  add("g_J_at_R", g.value,
      "exp(27|lambda_J|/64)(16 Gamma(d/2 + 1)(3/(2m beta))^(d/2) "
      "exp(C 2^(-3d) H^2 + beta b log3/2 + "
      "beta(M+B)(R^2 + B/2 + A + 1/16)) + 1); "
      "H = 1 + beta + (sqrt(beta) + beta)(||A_J||(MR + M + B)/4 + "
      "sqrt(d/beta)); C heuristic");
  add("log_g_J_at_R", g.log_value,
      "log-domain evaluation of g_J_at_R; finite even when g_J_at_R "
      "overflows");
  add("C_hat_zJ", c_hat,
      C_hat_zJ ? "supplied directly"
               : "spectral_prefactor * g_J_at_R; spectral_prefactor is a "
                 "heuristic constant (existence proven; value unknown)");
  add("K_tail_split", k_tail,
      "exp(|lambda_J| k eta/4) with k eta = (2/|lambda_J|) log(1/eps); "
      "tail-splitting radius in the moment estimates");
  add("empirical_risk_bound", i0 + i1.value + i2, "I0 + I1 + I2");
  add("population_risk_bound", i0 + i1.value + i2 + i3,
      "I0 + I1 + I2 + I3; reuses the supplied C_hat_zJ for the population "
      "initialization term");
  add("g_J_overflowed", g.overflowed ? 1.0 : 0.0,
      "1 if g_J_at_R overflowed double precision (log_g_J_at_R stays "
      "finite)");
  add("horizon_ok", i1.horizon_ok ? 1.0 : 0.0,
      "1 if k eta = (2/|lambda_J|) log(1/eps) >= e as the I1 formula "
      "presumes");
  return rep;
}

}  // namespace nsgld
