#pragma once

#include <memory>
#include <optional>

#include "pdmf/grid.hpp"

namespace pdmf::factor2 {

using funcrep::ConjClosedGrid;
using funcrep::ExprPtr;
using funcrep::GridMatrixFunction;
using funcrep::Point;

struct FactorizationConfig {
  int ode_steps = 200;
  double fd_step = 1e-5;  // central-difference step for the homotopy derivative
  std::optional<numc::BranchAngle> branch;  // empty = automatic selection
  Tolerances tol{};
  // Polar layout of the evaluation grid, used only for the holomorphy
  // diagnostic; leave zero when unknown and the diagnostic reports -1.
  int grid_radial = 0;
  int grid_angular = 0;
};

/// max over conjugate pairs of ||u(z) * conj(u(conj z)) - I||_F.
double star_relation_residual(const ExprPtr& u, const ConjClosedGrid& grid,
                              const Tolerances& tol = {});

/// Initial factor at the homotopy origin: for u0 with u0 * conj(u0) = I,
/// writes log u0 = X + iY (entrywise real and imaginary parts), checks that X
/// vanishes and X, Y commute, and returns e^{iY/2}, which satisfies
/// V0 * conj(V0)^-1 = u0. Throws StarRelationViolated when the star relation
/// (or the implied X = 0) fails.
CMatrix initial_factor(const CMatrix& u0, const FactorizationConfig& cfg = {});

/// Integrates dV/dt = (1/2) (dU_t/dt) U_t^-1 V from t = 0 to 1 along the path
/// U_t(z) = u(t z), starting from initial_factor(u(0)).
CMatrix ode_factorize_point(const ExprPtr& u, const Point& z, const FactorizationConfig& cfg);

struct FactorizationReport {
  double reconstruction_residual = 0.0;
  double star_residual = 0.0;
  double min_singular_value = 0.0;
  double holomorphy_diag = -1.0;
};

struct FactorizationResult {
  GridMatrixFunction factors;
  FactorizationReport report;
};

/// Runs the per-point homotopy ODE over the grid and verifies the symmetric
/// factorization u(z) = v(z) * conj(v(conj z))^-1 through the stored pairing.
FactorizationResult factorize_symmetric(const ExprPtr& u,
                                        std::shared_ptr<const ConjClosedGrid> grid,
                                        const FactorizationConfig& cfg = {});

struct SymmetricBasis {
  GridMatrixFunction a;  // a(z) = conj(v(conj z))^-1
  GridMatrixFunction b;  // b(z) = conj(a(conj z)) = v(z)^-1, exactly star-paired with a
  double consistency = 0.0;
};

/// Coefficient pair of the star-fixed basis change, with b = a* exact at every
/// conjugate pair; `consistency` reports max ||a + b*u - 2a||_F with u
/// reconstructed from v.
SymmetricBasis symmetric_basis_coefficients(const GridMatrixFunction& v,
                                            const Tolerances& tol = {});

/// Discrete conjugate-derivative magnitude on interior polar stencils of a
/// tensor grid with the given polar layout; -1 when the layout does not apply.
/// Reported as a diagnostic only, never asserted.
double holomorphy_diagnostic(const GridMatrixFunction& v, int radial, int angular);

}  // namespace pdmf::factor2
