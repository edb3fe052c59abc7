#pragma once

#include <memory>

#include "pdmf/grid.hpp"

namespace pdmf::kato {

using funcrep::ConjClosedGrid;
using funcrep::ExprPtr;
using funcrep::GridMatrixFunction;
using funcrep::Point;

/// Pointwise-evaluable square-matrix-valued function on a domain. Expression
/// trees are the production instance; tests and intermediate pipeline objects
/// provide their own implementations.
class MatrixField {
 public:
  virtual ~MatrixField() = default;
  virtual int nvars() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual CMatrix at(const Point& z) const = 0;
};

class ExprField final : public MatrixField {
 public:
  explicit ExprField(ExprPtr f, Tolerances tol = {});
  /// Explicit arity for expressions that do not pin one (constant trees).
  ExprField(ExprPtr f, int nvars, Tolerances tol = {});
  int nvars() const override { return nvars_; }
  Eigen::Index dim() const override { return dim_; }
  CMatrix at(const Point& z) const override;
  const ExprPtr& expr() const { return expr_; }

 private:
  ExprPtr expr_;
  Tolerances tol_;
  int nvars_;
  Eigen::Index dim_;
};

/// Straight-line contraction H(x, s) = s*x toward the origin; valid on every
/// domain of the chain since all of them (including half domains) are
/// star-shaped about 0.
struct ContractionHomotopy {
  funcrep::DomainDescriptor domain;
};

Point contract_point(const ContractionHomotopy& h, const Point& x, double s);

struct TransportOptions {
  double fd_step = 1e-5;  // central-difference step for the path derivative
  Tolerances tol{};
};

/// Frame transporting the projector p(0) to p(x) along s -> p(s*x): solves
/// F'(s) = [P'(s), P(s)] F(s), F(0) = I by fixed-step RK4 with the path
/// derivative obtained from central differences plus one Richardson level.
/// Throws NotIdempotentAlongPath if p leaves the idempotent manifold along the
/// ray, TransportDiverged if the frame condition number exceeds the bound.
CMatrix kato_transport(const MatrixField& p, const Point& x, int steps,
                       const TransportOptions& opt = {});

/// Real-arithmetic variant for fields that are real on real points (used on
/// the [-1,1]^n base domain). Throws NotRealOnRealSlice if an evaluation has
/// imaginary residue above tol.exact.
RMatrix kato_transport_real(const MatrixField& p, const Point& x, int steps,
                            const TransportOptions& opt = {});

/// Frame field from projector transport over a grid.
struct TransportResult {
  GridMatrixFunction frames;
  Eigen::Index rank = 0;
  double residual = 0.0;  // max over the grid of ||V^-1 p V - diag(I_rank, 0)||_F
};

/// Per-point transports composed with the constant split of p(0):
/// V(z) = kato_transport(p, z, steps) * w where (w, rank) = idempotent_split(p(0)).
TransportResult trivialize_idempotent(const MatrixField& p,
                                      std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                      const TransportOptions& opt = {});

/// Same pipeline carried out entirely in real arithmetic; values are stored as
/// complex matrices with exactly zero imaginary parts.
TransportResult trivialize_idempotent_real(const MatrixField& p,
                                           std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                           const TransportOptions& opt = {});

}  // namespace pdmf::kato
