#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "pdmf/funcrep.hpp"

namespace pdmf::funcrep {

/// Element of the domain chain: the first n-k coordinates range over [-1, 1],
/// the last k over the closed unit disc. With `half` set, the first disc
/// coordinate (index n-k) is restricted to the closed upper half disc.
struct DomainDescriptor {
  int n = 1;
  int k = 0;
  bool half = false;

  bool operator==(const DomainDescriptor&) const = default;
  /// Index of the first disc coordinate, n if there is none.
  int first_disc() const { return n - k; }
};

inline constexpr std::size_t kNoConjPair = std::numeric_limits<std::size_t>::max();

/// Finite sample of a domain, closed under componentwise conjugation with the
/// pairing stored explicitly. Conjugate pairs are exact by construction:
/// point[conj_index[i]] == conj(point[i]) holds without tolerance. On half
/// domains, points whose conjugate falls outside carry kNoConjPair.
struct ConjClosedGrid {
  DomainDescriptor domain;
  std::vector<Point> points;
  std::vector<std::size_t> conj_index;

  std::size_t size() const { return points.size(); }
  bool fully_paired() const;
  /// Validates the pairing invariants; throws GridMismatch on violation.
  void check_invariants() const;
};

/// Uniform points on [-1, 1]; count >= 2 gives both endpoints, count == 1 gives {0}.
std::vector<double> uniform_interval_points(int count);

/// Radii 0 = r_0 < ... < r_{radial-1} = 1 of the polar grids.
std::vector<double> polar_radii(int radial);

/// The polar grid's real diameter {-1, ..., -r_1, 0, r_1, ..., 1}, bit-identical
/// to the radii so interval grids built from it match disc grids exactly.
std::vector<double> diameter_interval_points(int radial);

/// Tensor grid: uniform interval points on each [-1,1] factor and polar points
/// r_i * e^{i*theta_j}, theta_j = 2*pi*j/angular, on each disc factor. Angular
/// count must be even so that theta = 0 and theta = pi rays (and hence exact
/// conjugate pairs) are present. Half domains keep theta in [0, pi] only.
ConjClosedGrid build_grid(const DomainDescriptor& domain, int radial, int angular, int interval);

/// Same construction with an explicit interval point set shared across all
/// interval factors (the pipelines pass diameter_interval_points so that
/// consecutive stage grids share real-slice points bit-exactly).
ConjClosedGrid build_grid_points(const DomainDescriptor& domain, int radial, int angular,
                                 const std::vector<double>& interval_points);

/// Matrix samples over a grid; the output form of computed conjugators/factors.
struct GridMatrixFunction {
  std::shared_ptr<const ConjClosedGrid> grid;
  std::vector<CMatrix> values;

  GridMatrixFunction() = default;
  GridMatrixFunction(std::shared_ptr<const ConjClosedGrid> g, std::vector<CMatrix> vals);
};

std::vector<CMatrix> evaluate_on_grid(const ExprPtr& f, const ConjClosedGrid& grid,
                                      const Tolerances& tol = {});

/// max over conjugate pairs of ||f(z) - conj(f(conj z))||_F, evaluated once per
/// point and compared through the stored pairing. Requires a fully paired grid.
double real_symmetry_residual(const ExprPtr& f, const ConjClosedGrid& grid,
                              const Tolerances& tol = {});

/// max over the grid of ||f(z)^2 - f(z)||_F.
double idempotency_residual(const ExprPtr& p, const ConjClosedGrid& grid,
                            const Tolerances& tol = {});

/// min over the grid of the smallest singular value of f(z).
double invertibility_margin(const ExprPtr& f, const ConjClosedGrid& grid,
                            const Tolerances& tol = {});
double invertibility_margin(const GridMatrixFunction& f);

/// Weighted derivative norm: sum over |alpha| <= N of (1/alpha!) times the grid
/// maximum of the largest entry magnitude of d^alpha f.
double dn_norm(const Poly& f, int N, const ConjClosedGrid& grid);

/// Bit-level identity key for a point (signed zeros normalized), used for
/// exact grid lookups and evaluation caches.
std::string point_key(const Point& z);

/// Exponent multi-indices with |alpha| <= max_degree in ascending graded
/// lexicographic order; the canonical enumeration used by generators.
std::vector<std::vector<int>> multi_indices(int nvars, int max_degree);

}  // namespace pdmf::funcrep
