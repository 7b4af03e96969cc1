#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "linalg.hpp"
#include "objectives.hpp"
#include "spectral.hpp"

using namespace nsgld;

namespace {

template <class Fn>
void expect_error(Fn&& fn, ErrorCode code, const std::string& needle) {
  try {
    fn();
    FAIL_CHECK("expected an Error containing '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.code() == code);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                  e.what());
  }
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Deterministic orthogonal matrix from the QR of a seeded Gaussian draw.
Matrix random_orthogonal(int dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Matrix raw(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) raw(i, k) = normal(gen);
  Eigen::HouseholderQR<Matrix> qr(raw);
  return qr.householderQ();
}

// Symmetric matrix with one negative eigenvalue -mu and the rest positive.
Matrix random_saddle(int dim, double mu, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  Vector eigs(dim);
  eigs[0] = -mu;
  for (int i = 1; i < dim; ++i) eigs[i] = pos(gen);
  const Matrix q = random_orthogonal(dim, seed ^ 0x9e3779b97f4a7c15ull);
  return q * eigs.asDiagonal() * q.transpose();
}

// Closed form for the negative eigenvalue of (I+J) diag(-1, lambda1) with a
// single rotation block of strength a.
double twisted_mu(double lambda1, double a) {
  const double s = lambda1 - 1.0;
  return (std::sqrt(s * s + 4.0 * lambda1 * (1.0 + a * a)) - s) / 2.0;
}

}  // namespace

TEST_CASE("mu_star extracts the unique negative curvature") {
  CHECK(mu_star(diag2(-1.0, 2.0)) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 0.2;
  m(1, 1) = -3.5;
  m(2, 2) = 7.0;
  CHECK(mu_star(m) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("mu_star is invariant under orthogonal conjugation") {
  Matrix d = Matrix::Zero(4, 4);
  d(0, 0) = -1.7;
  d(1, 1) = 0.4;
  d(2, 2) = 2.2;
  d(3, 3) = 5.0;
  const Matrix q = random_orthogonal(4, 42);
  const Matrix conj = q * d * q.transpose();
  CHECK(std::abs(mu_star(conj) - 1.7) <= 1e-9);
}

TEST_CASE("mu_star rejects non-saddle structure") {
  expect_error([] { mu_star(diag2(1.0, 2.0)); }, ErrorCode::saddle_structure,
               "found 0");
  Matrix two_neg = Matrix::Zero(3, 3);
  two_neg(0, 0) = -1.0;
  two_neg(1, 1) = -2.0;
  two_neg(2, 2) = 3.0;
  expect_error([&] { mu_star(two_neg); }, ErrorCode::saddle_structure,
               "found 2");
}

TEST_CASE("mu_star validates its input matrix") {
  expect_error([] { mu_star(Matrix::Zero(0, 0)); },
               ErrorCode::invalid_argument, "square and nonempty");
  expect_error([] { mu_star(Matrix::Zero(2, 3)); },
               ErrorCode::invalid_argument, "square and nonempty");

  Matrix asym = diag2(-1.0, 2.0);
  asym(0, 1) = 0.5;
  expect_error([&] { mu_star(asym); }, ErrorCode::invalid_argument,
               "symmetric");

  Matrix bad = diag2(-1.0, 2.0);
  bad(1, 1) = std::nan("");
  expect_error([&] { mu_star(bad); }, ErrorCode::invalid_argument, "mu_star");
}

TEST_CASE("mu_star_J matches the 2x2 closed form") {
  for (double lambda1 : {0.5, 1.0, 2.0, 4.983922832280327}) {
    for (double a : {0.0, 0.3, 1.0, 2.5}) {
      CAPTURE(lambda1);
      CAPTURE(a);
      const AntisymmetricMatrix j = block_diagonal_j(2, {a});
      const double got = mu_star_J(diag2(-1.0, lambda1), j);
      CHECK(got == doctest::Approx(twisted_mu(lambda1, a)).epsilon(1e-10));
    }
  }
}

TEST_CASE("mu_star_J pinned value on diag(-1,2) with unit rotation") {
  const AntisymmetricMatrix j = block_diagonal_j(2, {1.0});
  const double got = mu_star_J(diag2(-1.0, 2.0), j);
  // (sqrt(17) - 1) / 2
  CHECK(std::abs(got - 1.5615528128088303) <= 1e-10);
}

TEST_CASE("mu_star_J with zero drift reduces to mu_star") {
  for (int dim : {2, 3, 5, 9, 20}) {
    CAPTURE(dim);
    const Matrix l = random_saddle(dim, 1.3, 100 + dim);
    const AntisymmetricMatrix j{dim};
    CHECK(std::abs(mu_star_J(l, j) - mu_star(l)) <= 1e-12);
  }
}

TEST_CASE("mu_star_J grows strictly with rotation strength") {
  const Matrix l = diag2(-1.0, 2.0);
  double prev = mu_star(l);
  for (double a : {0.5, 1.0, 2.0}) {
    const double cur = mu_star_J(l, block_diagonal_j(2, {a}));
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("mu_star_J error paths") {
  expect_error(
      [] { mu_star_J(diag2(-1.0, 2.0), AntisymmetricMatrix{3}); },
      ErrorCode::invalid_argument, "does not match");

  Matrix two_neg = Matrix::Zero(3, 3);
  two_neg(0, 0) = -1.0;
  two_neg(1, 1) = -2.0;
  two_neg(2, 2) = 3.0;
  expect_error(
      [&] { mu_star_J(two_neg, block_diagonal_j(3, {0.5})); },
      ErrorCode::saddle_structure, "exactly one eigenvalue");

  Matrix asym = diag2(-1.0, 2.0);
  asym(1, 0) = 0.3;
  expect_error([&] { mu_star_J(asym, AntisymmetricMatrix{2}); },
               ErrorCode::invalid_argument, "symmetric");
}

TEST_CASE("saddle data validation") {
  SaddleData good{diag2(-1.0, 2.0), Matrix::Identity(2, 2), 1.0};
  CHECK_NOTHROW(good.validate());

  SaddleData bad_min{diag2(-1.0, 2.0), diag2(1.0, -0.1), 1.0};
  expect_error([&] { bad_min.validate(); }, ErrorCode::invalid_argument,
               "positive definite");

  SaddleData zero_barrier{diag2(-1.0, 2.0), Matrix::Identity(2, 2), 0.0};
  expect_error([&] { zero_barrier.validate(); }, ErrorCode::invalid_argument,
               "barrier");
  SaddleData nan_barrier{diag2(-1.0, 2.0), Matrix::Identity(2, 2),
                         std::nan("")};
  expect_error([&] { nan_barrier.validate(); }, ErrorCode::invalid_argument,
               "barrier");

  SaddleData mismatch{diag2(-1.0, 2.0), Matrix::Identity(3, 3), 1.0};
  expect_error([&] { mismatch.validate(); }, ErrorCode::invalid_argument,
               "different dimensions");

  Matrix asym = diag2(-1.0, 2.0);
  asym(0, 1) = 0.2;
  SaddleData crooked{asym, Matrix::Identity(2, 2), 1.0};
  expect_error([&] { crooked.validate(); }, ErrorCode::invalid_argument,
               "symmetric");
}

TEST_CASE("asymptotic rate pinned value") {
  SaddleData saddle{diag2(-1.0, 2.0), Matrix::Identity(2, 2), 1.0};
  const GapEstimate est = eyring_kramers_rate(saddle, 5.0);
  // mu/(2 pi) sqrt(1/2) exp(-5) with mu = 1
  CHECK(std::abs(est.lambda - (-7.58285452584807e-4)) <= 1e-16);
  CHECK(est.method == GapMethod::eyring_kramers_asymptotic);
  CHECK(est.beta == 5.0);
}

TEST_CASE("asymptotic rate scales with the twisted curvature") {
  SaddleData saddle{diag2(-1.0, 2.0), Matrix::Identity(2, 2), 1.0};
  const AntisymmetricMatrix j = block_diagonal_j(2, {1.0});
  const GapEstimate base = eyring_kramers_rate(saddle, 5.0);
  const GapEstimate twisted = eyring_kramers_rate(saddle, 5.0, &j);
  CHECK(std::abs(twisted.lambda - (-1.1841027813958224e-3)) <= 1e-15);
  const double mu = mu_star(saddle.hessian_at_saddle);
  const double mu_j = mu_star_J(saddle.hessian_at_saddle, j);
  CHECK(twisted.lambda / base.lambda ==
        doctest::Approx(mu_j / mu).epsilon(1e-12));
}

TEST_CASE("asymptotic rate errors") {
  SaddleData saddle{diag2(-1.0, 2.0), Matrix::Identity(2, 2), 1.0};
  expect_error([&] { eyring_kramers_rate(saddle, 0.0); },
               ErrorCode::invalid_argument, "beta");
  expect_error([&] { eyring_kramers_rate(saddle, std::nan("")); },
               ErrorCode::invalid_argument, "beta");

  // One strict negative plus a zero eigenvalue passes the saddle count but
  // leaves the Hessian singular.
  SaddleData singular{diag2(-1.0, 0.0), Matrix::Identity(2, 2), 1.0};
  expect_error([&] { eyring_kramers_rate(singular, 2.0); },
               ErrorCode::numeric, "singular");
}

TEST_CASE("complexity ratio pinned value and formula") {
  SaddleData saddle{diag2(-1.0, 1.0), Matrix::Identity(2, 2), 1.0};
  const AntisymmetricMatrix j = block_diagonal_j(2, {1.0});
  const double ratio = complexity_ratio(saddle, j);
  // (1 + 1)^4 (1 / sqrt(2))^5 = 2 sqrt(2)
  CHECK(std::abs(ratio - 2.8284271247461903) <= 1e-12);

  for (double lambda1 : {2.0, 4.0, 6.0}) {
    for (double a : {0.5, 1.5}) {
      CAPTURE(lambda1);
      CAPTURE(a);
      SaddleData s{diag2(-1.0, lambda1), Matrix::Identity(2, 2), 1.0};
      const AntisymmetricMatrix jj = block_diagonal_j(2, {a});
      const double amp = 1.0 + a * a;
      const double expected = amp * amp * amp * amp *
                              std::pow(1.0 / twisted_mu(lambda1, a), 5.0);
      CHECK(complexity_ratio(s, jj) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("outperform threshold values and errors") {
  const double t0 = outperform_threshold(0.0);
  CHECK(t0 == 4.0);  // exact: (1 + 1)(1 + 1)
  CHECK(std::abs(outperform_threshold(1.0) - 4.983922832280327) <= 1e-12);
  CHECK(std::abs(outperform_threshold(2.0) - 6.909911404580861) <= 1e-12);
  expect_error([] { outperform_threshold(-0.1); },
               ErrorCode::invalid_argument, "nonnegative");
  expect_error([] { outperform_threshold(std::nan("")); },
               ErrorCode::invalid_argument, "nonnegative");
}

TEST_CASE("threshold marks the break-even saddle flatness") {
  // At lambda1 = threshold(a1) the ratio equals 1 up to rounding, and the
  // verdict flips on either side.
  for (double a : {0.3, 1.0, 2.0}) {
    CAPTURE(a);
    const double th = outperform_threshold(a);
    const AntisymmetricMatrix j = block_diagonal_j(2, {a});
    SaddleData at{diag2(-1.0, th), Matrix::Identity(2, 2), 1.0};
    CHECK(ratio_verdict(complexity_ratio(at, j)) == "boundary");

    SaddleData below{diag2(-1.0, th - 0.1), Matrix::Identity(2, 2), 1.0};
    CHECK(ratio_verdict(complexity_ratio(below, j)) == "sgld_favorable");
    SaddleData above{diag2(-1.0, th + 0.1), Matrix::Identity(2, 2), 1.0};
    CHECK(ratio_verdict(complexity_ratio(above, j)) == "nsgld_favorable");
  }
}

TEST_CASE("ratio verdict bands") {
  CHECK(ratio_verdict(0.5) == "nsgld_favorable");
  CHECK(ratio_verdict(2.0) == "sgld_favorable");
  CHECK(ratio_verdict(1.0) == "boundary");
  CHECK(ratio_verdict(1.0 + 5e-10) == "boundary");
  CHECK(ratio_verdict(1.0 - 5e-10) == "boundary");
  CHECK(ratio_verdict(1.0 + 2e-9) == "sgld_favorable");
  CHECK(ratio_verdict(1.0 - 2e-9) == "nsgld_favorable");
}

TEST_CASE("grid generator recovers the 1d Ornstein-Uhlenbeck gap") {
  const auto quad = isotropic_quadratic(1);
  const GapEstimate est =
      grid_generator_gap(*quad, AntisymmetricMatrix{1}, 1.0, GridSpec{});
  CHECK(std::abs(est.lambda - (-1.0)) <= 1e-6);
  CHECK(est.method == GapMethod::grid_generator);
  CHECK(est.beta == 1.0);

  // The OU spectrum is -k independently of temperature.
  const GapEstimate hot =
      grid_generator_gap(*quad, AntisymmetricMatrix{1}, 2.0, GridSpec{});
  CHECK(std::abs(hot.lambda - (-1.0)) <= 1e-4);
}

TEST_CASE("grid generator on the 2d bowl with and without rotation") {
  const auto quad = isotropic_quadratic(2);
  const GridSpec grid{-6.0, 6.0, 20};
  const GapEstimate plain =
      grid_generator_gap(*quad, AntisymmetricMatrix{2}, 1.0, grid);
  const GapEstimate spun =
      grid_generator_gap(*quad, block_diagonal_j(2, {1.0}), 1.0, grid);
  // For the isotropic bowl the rotation leaves the gap at -1.
  CHECK(std::abs(plain.lambda - (-1.0)) <= 1e-4);
  CHECK(std::abs(spun.lambda - (-1.0)) <= 1e-4);
  CHECK(std::abs(spun.lambda) >= std::abs(plain.lambda) - 0.02);
}

TEST_CASE("grid generator input validation") {
  const auto q3 = isotropic_quadratic(3);
  expect_error(
      [&] {
        grid_generator_gap(*q3, AntisymmetricMatrix{3}, 1.0, GridSpec{});
      },
      ErrorCode::invalid_argument, "must be 1 or 2");

  const auto q1 = isotropic_quadratic(1);
  expect_error(
      [&] {
        grid_generator_gap(*q1, AntisymmetricMatrix{2}, 1.0, GridSpec{});
      },
      ErrorCode::invalid_argument, "does not match");
  expect_error(
      [&] {
        grid_generator_gap(*q1, AntisymmetricMatrix{1}, 0.0, GridSpec{});
      },
      ErrorCode::invalid_argument, "beta");
  expect_error(
      [&] {
        grid_generator_gap(*q1, AntisymmetricMatrix{1}, 1.0,
                           GridSpec{6.0, -6.0, 40});
      },
      ErrorCode::invalid_argument, "lo < hi");
  expect_error(
      [&] {
        grid_generator_gap(*q1, AntisymmetricMatrix{1}, 1.0,
                           GridSpec{-6.0, 6.0, 3});
      },
      ErrorCode::invalid_argument, "[4, 50]");
  expect_error(
      [&] {
        grid_generator_gap(*q1, AntisymmetricMatrix{1}, 1.0,
                           GridSpec{-6.0, 6.0, 60});
      },
      ErrorCode::invalid_argument, "[4, 50]");
}
