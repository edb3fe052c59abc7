#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "pdmf/numc.hpp"
#include "test_support.hpp"

using namespace pdmf;
using namespace pdmf::numc;
using pdmf::testing::random_complex;
using pdmf::testing::random_idempotent;
using pdmf::testing::random_well_conditioned;
using pdmf::testing::seeded;

namespace {

constexpr double kPi = std::numbers::pi;

// Truncated power-series oracle for the exponential (independent of mat_expm).
CMatrix expm_series(const CMatrix& a, int terms = 30) {
  CMatrix acc = CMatrix::Identity(a.rows(), a.cols());
  CMatrix power = CMatrix::Identity(a.rows(), a.cols());
  double factorial = 1.0;
  for (int k = 1; k <= terms; ++k) {
    power = power * a;
    factorial *= k;
    acc += power / factorial;
  }
  return acc;
}

// Trapezoid quadrature of the holomorphic functional calculus over a circle
// that encloses the spectrum and avoids the principal cut. Cross-check oracle
// for the logarithm.
CMatrix contour_log(const CMatrix& a, Complex center, double radius, int nodes) {
  const Eigen::Index m = a.rows();
  CMatrix acc = CMatrix::Zero(m, m);
  for (int j = 0; j < nodes; ++j) {
    const double theta = 2.0 * kPi * j / nodes;
    const Complex unit = std::polar(1.0, theta);
    const Complex zeta = center + radius * unit;
    const CMatrix resolvent =
        (zeta * CMatrix::Identity(m, m) - a).partialPivLu().inverse();
    acc += unit * std::log(zeta) * resolvent;
  }
  return acc * (radius / nodes);
}

bool imag_parts_in_window(const CMatrix& log, double theta) {
  Eigen::ComplexEigenSolver<CMatrix> es(log, false);
  for (Eigen::Index i = 0; i < log.rows(); ++i) {
    const double im = es.eigenvalues()[i].imag();
    if (!(im > theta - kPi - 1e-12 && im <= theta + kPi + 1e-12)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("mat_inv: identity and diagonal") {
  const CMatrix identity = CMatrix::Identity(3, 3);
  CHECK((mat_inv(identity) - identity).norm() == doctest::Approx(0.0));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  const CMatrix d_inv = mat_inv(d);
  CHECK(std::abs(d_inv(0, 0) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(d_inv(1, 1) - Complex(0.25)) < 1e-15);
}

TEST_CASE("mat_inv: multiply-back oracle on random matrices") {
  auto gen = seeded(42);
  for (int trial = 0; trial < 25; ++trial) {
    const CMatrix a = random_well_conditioned(5, gen);
    const CMatrix b = mat_inv(a);
    CHECK((a * b - CMatrix::Identity(5, 5)).norm() < 1e-10);
  }
}

TEST_CASE("mat_inv: rejects singular input") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  CHECK_THROWS_AS((void)mat_inv(a), SingularMatrix);
}

TEST_CASE("mat_expm: zero matrix maps to identity") {
  const CMatrix z = CMatrix::Zero(4, 4);
  CHECK((mat_expm(z) - CMatrix::Identity(4, 4)).norm() == doctest::Approx(0.0));
}

TEST_CASE("mat_expm: nilpotent Jordan block is exact") {
  CMatrix j = CMatrix::Zero(2, 2);
  j(0, 1) = 1.0;
  CMatrix expected = CMatrix::Identity(2, 2);
  expected(0, 1) = 1.0;
  CHECK((mat_expm(j) - expected).norm() < 1e-14);
}

TEST_CASE("mat_expm: agrees with the power-series oracle") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex(0.0, kPi / 2.0);
  d(1, 1) = Complex(0.0, -kPi / 2.0);
  CHECK((mat_expm(d) - expm_series(d)).norm() < 1e-12);
  CHECK(std::abs(mat_expm(d)(0, 0) - Complex(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(mat_expm(d)(1, 1) - Complex(0.0, -1.0)) < 1e-12);

  auto gen = seeded(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = random_complex(4, gen);
    CHECK((mat_expm(a) - expm_series(a, 40)).norm() < 1e-10);
  }
}

TEST_CASE("mat_expm: multiplicative on commuting arguments") {
  auto gen = seeded(11);
  for (int trial = 0; trial < 10; ++trial) {
    // Polynomials in the same matrix commute.
    const CMatrix a = random_complex(3, gen);
    const CMatrix b = 0.3 * a * a + 0.7 * a;
    REQUIRE((a * b - b * a).norm() < 1e-10);
    CHECK((mat_expm(CMatrix(a + b)) - mat_expm(a) * mat_expm(b)).norm() < 1e-6);
  }
}

TEST_CASE("mat_logm: identity maps to zero") {
  const CMatrix identity = CMatrix::Identity(3, 3);
  CHECK(mat_logm(identity, BranchAngle{0.0}).norm() < 1e-14);
  CHECK(mat_logm(identity, BranchAngle{kPi / 3.0}).norm() < 1e-14);
}

TEST_CASE("mat_logm: branch windows and exp round trip") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex(0.0, 1.0);
  d(1, 1) = Complex(0.0, -1.0);

  // theta = 0: cut along the negative real axis, arguments in (-pi, pi].
  const CMatrix principal = mat_logm(d, BranchAngle{0.0});
  CHECK(std::abs(principal(0, 0) - Complex(0.0, kPi / 2.0)) < 1e-12);
  CHECK(std::abs(principal(1, 1) - Complex(0.0, -kPi / 2.0)) < 1e-12);
  CHECK((mat_expm(principal) - d).norm() < 1e-12);

  // theta = pi: cut along the positive real axis, arguments in (0, 2*pi].
  const CMatrix rotated = mat_logm(d, BranchAngle{kPi});
  CHECK(std::abs(rotated(0, 0) - Complex(0.0, kPi / 2.0)) < 1e-12);
  CHECK(std::abs(rotated(1, 1) - Complex(0.0, 3.0 * kPi / 2.0)) < 1e-12);
  CHECK((mat_expm(rotated) - d).norm() < 1e-12);

  // -I with the cut along the negative imaginary axis picks arg(-1) = +pi.
  const CMatrix minus = CMatrix(-CMatrix::Identity(2, 2));
  const CMatrix log_minus = mat_logm(minus, BranchAngle{kPi / 2.0});
  CHECK((log_minus - Complex(0.0, kPi) * CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((mat_expm(log_minus) - minus).norm() < 1e-12);
}

TEST_CASE("mat_logm: round trip with automatic branch on random matrices") {
  auto gen = seeded(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = 2 + trial % 4;
    const CMatrix a = random_well_conditioned(m, gen);
    const BranchAngle branch = auto_branch(a);
    const CMatrix log = mat_logm(a, branch);
    CHECK((mat_expm(log) - a).norm() < 1e-10);
    CHECK(imag_parts_in_window(log, branch.theta));
  }
}

TEST_CASE("mat_logm: rejects an eigenvalue on the cut ray") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  // theta = pi puts the cut along the positive real axis.
  CHECK_THROWS_AS((void)mat_logm(d, BranchAngle{kPi}), EigenvalueOnBranchCut);
  CHECK_THROWS_AS((void)mat_logm(CMatrix::Zero(2, 2), BranchAngle{0.0}), SingularMatrix);
}

TEST_CASE("mat_logm: contour-integral cross-check") {
  auto gen = seeded(5);
  CMatrix a(2, 2);
  a << Complex(2.0, 0.0), Complex(0.5, 0.1), Complex(0.1, -0.2), Complex(3.0, 0.0);
  const CMatrix via_contour = contour_log(a, Complex(2.5, 0.0), 1.8, 800);
  const CMatrix via_logm = mat_logm(a, BranchAngle{0.0});
  CHECK((via_contour - via_logm).norm() < 1e-9);
  (void)gen;
}

TEST_CASE("mat_logm: star-unitary input splits as iY with X = 0") {
  auto gen = seeded(99);
  for (int trial = 0; trial < 25; ++trial) {
    RMatrix y = pdmf::testing::random_real(3, gen);
    y *= 1.8 / y.norm();
    const CMatrix u = mat_expm(CMatrix(Complex(0.0, 1.0) * y.cast<Complex>()));
    REQUIRE((u * u.conjugate() - CMatrix::Identity(3, 3)).norm() < 1e-12);

    const CMatrix log = mat_logm(u, auto_branch(u));
    const RMatrix x_part = log.real();
    const RMatrix y_part = log.imag();
    CHECK(x_part.norm() < 1e-10);
    CHECK((x_part * y_part - y_part * x_part).norm() < 1e-10);
  }
}

TEST_CASE("auto_branch: prefers the principal cut") {
  CMatrix two = CMatrix(2.0 * CMatrix::Identity(2, 2));
  CHECK(auto_branch(two).theta == doctest::Approx(0.0).epsilon(1e-12));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex(0.0, 1.0);
  d(1, 1) = Complex(0.0, -1.0);
  CHECK(auto_branch(d).theta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idempotent_split: diagonal cases") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  const auto split = idempotent_split(d);
  CHECK(split.rank == 1);
  CHECK((split.basis - CMatrix::Identity(2, 2)).norm() < 1e-14);

  const auto zero_split = idempotent_split(CMatrix(CMatrix::Zero(3, 3)));
  CHECK(zero_split.rank == 0);
  CHECK((zero_split.basis - CMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("idempotent_split: symmetric rank-one projector") {
  CMatrix a(2, 2);
  a << 0.5, 0.5, 0.5, 0.5;
  const auto split = idempotent_split(a);
  CHECK(split.rank == 1);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(split.basis(0, 0) - Complex(s)) < 1e-14);
  CHECK(std::abs(split.basis(1, 0) - Complex(s)) < 1e-14);
  CHECK(std::abs(split.basis(0, 1) - Complex(s)) < 1e-14);
  CHECK(std::abs(split.basis(1, 1) - Complex(-s)) < 1e-14);
}

TEST_CASE("idempotent_split: conjugation residual on random idempotents") {
  auto gen = seeded(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = 2 + trial % 4;
    const Eigen::Index rank = 1 + trial % m;
    const CMatrix p = random_idempotent(m, rank, gen);
    const auto split = idempotent_split(p);
    CHECK(split.rank == rank);
    const CMatrix d = rank_projector(m, split.rank);
    CHECK((mat_inv(split.basis) * p * split.basis - d).norm() < 1e-10);
    CHECK(std::abs(std::real(p.trace()) - static_cast<double>(split.rank)) < 1e-10);
  }
}

TEST_CASE("idempotent_split: real arithmetic on real input") {
  auto gen = seeded(77);
  RMatrix t = RMatrix::Identity(3, 3) + 0.3 * pdmf::testing::random_real(3, gen);
  RMatrix d = RMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1.0;
  const RMatrix p = t * d * t.partialPivLu().inverse();
  const auto split = idempotent_split(p);
  CHECK(split.rank == 2);
  CHECK((split.basis.partialPivLu().solve(p * split.basis) - d).norm() < 1e-10);
}

TEST_CASE("idempotent_split: error taxonomy") {
  CHECK_THROWS_AS((void)idempotent_split(CMatrix(2.0 * CMatrix::Identity(2, 2))),
                  NotIdempotent);

  // With the idempotency gate loosened, off-cluster spectra are still rejected.
  Tolerances loose;
  loose.resid = 1.0;
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 0.5;
  d(1, 1) = 1.0;
  CHECK_THROWS_AS((void)idempotent_split(d, loose), IllConditionedSplit);
}
