#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "pdmf/instances.hpp"
#include "pdmf/kato.hpp"
#include "test_support.hpp"

using namespace pdmf;
using namespace pdmf::funcrep;
using namespace pdmf::kato;
using pdmf::testing::seeded;

namespace {

constexpr double kPi = std::numbers::pi;

class CallableField final : public MatrixField {
 public:
  CallableField(int nvars, Eigen::Index dim, std::function<CMatrix(const Point&)> f)
      : nvars_(nvars), dim_(dim), f_(std::move(f)) {}
  int nvars() const override { return nvars_; }
  Eigen::Index dim() const override { return dim_; }
  CMatrix at(const Point& z) const override { return f_(z); }

 private:
  int nvars_;
  Eigen::Index dim_;
  std::function<CMatrix(const Point&)> f_;
};

RMatrix rotation(double t) {
  RMatrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

// Rank-one projector rotating with angle g(x); g(0) = 0 so the transport
// starts at diag(1, 0).
CallableField rotation_projector(std::function<double(double)> g) {
  return CallableField(1, 2, [g = std::move(g)](const Point& z) {
    const double t = g(z[0].real());
    RMatrix d = RMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    const RMatrix p = rotation(t) * d * rotation(t).transpose();
    return CMatrix(p.cast<Complex>());
  });
}

double transport_residual(const MatrixField& p, const Point& x, int steps) {
  const CMatrix f = kato_transport(p, x, steps);
  const CMatrix p0 = p.at(funcrep::origin(p.nvars()));
  const CMatrix p1 = p.at(x);
  return (f * p0 * f.partialPivLu().inverse() - p1).norm();
}

}  // namespace

TEST_CASE("contract_point: endpoints and midpoint") {
  const ContractionHomotopy h{DomainDescriptor{2, 1, false}};
  const Point x = {Complex(0.5, 0.25), Complex(-0.75, 0.0)};
  CHECK(contract_point(h, x, 1.0) == x);
  const Point at0 = contract_point(h, x, 0.0);
  CHECK(at0[0] == Complex(0.0, 0.0));
  CHECK(at0[1] == Complex(-0.0, 0.0));
  const Point mid = contract_point(h, x, 0.5);
  CHECK(mid[0] == Complex(0.25, 0.125));
  CHECK_THROWS_AS((void)contract_point(h, x, 1.5), Error);
}

TEST_CASE("kato_transport: constant projector gives the identity frame") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1.0;
  const CallableField constant(1, 3, [d](const Point&) { return d; });
  const CMatrix f = kato_transport(constant, {Complex(0.7, 0.3)}, 64);
  CHECK((f - CMatrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("kato_transport: rotation family conjugates the base projector") {
  const auto field = rotation_projector([](double x) { return (kPi / 3.0) * x; });
  const Point x = {Complex(1.0, 0.0)};
  CHECK(transport_residual(field, x, 200) < 1e-8);

  // Rank is preserved along the path.
  for (int i = 0; i <= 10; ++i) {
    const double s = i / 10.0;
    const CMatrix ps = field.at(funcrep::scaled(x, s));
    CHECK(std::abs(std::real(ps.trace()) - 1.0) < 1e-6);
  }
}

TEST_CASE("kato_transport: real variant matches the complex one on real data") {
  const auto field = rotation_projector([](double x) { return 0.8 * x; });
  const Point x = {Complex(0.9, 0.0)};
  const CMatrix fc = kato_transport(field, x, 100);
  const RMatrix fr = kato_transport_real(field, x, 100);
  CHECK((fc - fr.cast<Complex>()).norm() == 0.0);
  CHECK(fc.imag().norm() == 0.0);
}

TEST_CASE("kato_transport: RK4 order is visible under step doubling") {
  // Faster, non-uniform rotation so the 400-step residual stays above the
  // finite-difference floor.
  const auto field =
      rotation_projector([](double x) { return 1.3 * x + 0.9 * x * x * x; });
  const Point x = {Complex(1.0, 0.0)};
  double prev = -1.0;
  for (const int steps : {50, 100, 200, 400}) {
    const double resid = transport_residual(field, x, steps);
    if (prev >= 0.0) {
      CHECK(resid <= prev);
      if (prev > 1e-8) {
        CHECK(resid <= prev / 8.0);
      }
    }
    prev = resid;
  }
}

TEST_CASE("kato_transport: deterministic output") {
  const auto field = rotation_projector([](double x) { return 0.6 * x; });
  const Point x = {Complex(0.8, 0.0)};
  const CMatrix a = kato_transport(field, x, 128);
  const CMatrix b = kato_transport(field, x, 128);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("kato_transport: error taxonomy") {
  // Not idempotent along the ray.
  const CallableField drift(1, 2, [](const Point& z) {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = z[0];
    return d;
  });
  CHECK_THROWS_AS((void)kato_transport(drift, {Complex(0.5, 0.0)}, 32),
                  NotIdempotentAlongPath);

  const auto field = rotation_projector([](double x) { return x; });
  CHECK_THROWS_AS((void)kato_transport(field, {Complex(1.0, 0.0)}, 8), Error);
}

TEST_CASE("trivialize_idempotent: constant projector") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  const CallableField constant(1, 2, [d](const Point&) { return d; });
  const DomainDescriptor disc{1, 1, false};
  auto grid = std::make_shared<const ConjClosedGrid>(build_grid(disc, 3, 4, 3));
  const TransportResult result = trivialize_idempotent(constant, grid, 32);
  CHECK(result.rank == 1);
  CHECK(result.residual == 0.0);
  for (const CMatrix& v : result.frames.values) {
    CHECK((v - CMatrix::Identity(2, 2)).norm() == 0.0);
  }
}

TEST_CASE("trivialize_idempotent: generated instance meets the residual contract") {
  const ExprPtr p = instances::gen_idempotent_instance(1, 3, 1, 2, 0.3, 4242);
  const ExprField field(p);
  const DomainDescriptor disc{1, 1, false};
  auto grid = std::make_shared<const ConjClosedGrid>(build_grid(disc, 5, 8, 3));
  const TransportResult result = trivialize_idempotent(field, grid, 200);
  CHECK(result.rank == 1);
  CHECK(result.residual < 1e-6);

  // Rank from the trace oracle.
  for (const Point& z : grid->points) {
    CHECK(std::abs(std::real(field.at(z).trace()) - 1.0) < 1e-6);
  }
}

TEST_CASE("trivialize_idempotent: real arithmetic over the base domain") {
  const ExprPtr p = instances::gen_idempotent_instance(2, 3, 2, 1, 0.25, 7);
  const ExprField field(p);
  const DomainDescriptor base{2, 0, false};
  auto grid = std::make_shared<const ConjClosedGrid>(build_grid(base, 2, 4, 5));
  const TransportResult result = trivialize_idempotent_real(field, grid, 100);
  CHECK(result.rank == 2);
  CHECK(result.residual < 1e-7);
  for (const CMatrix& v : result.frames.values) {
    CHECK(v.imag().norm() == 0.0);
  }
}
