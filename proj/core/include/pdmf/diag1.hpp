#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "pdmf/kato.hpp"

namespace pdmf::diag1 {

using funcrep::ConjClosedGrid;
using funcrep::ExprPtr;
using funcrep::GridMatrixFunction;
using funcrep::Point;
using kato::MatrixField;
using kato::TransportOptions;

struct StageReport {
  int k = 0;
  Eigen::Index rank = 0;
  double residual = 0.0;
  double seam = 0.0;
};

struct VerificationReport {
  std::vector<StageReport> stages;
  double final_residual = 0.0;
  double symmetry_residual = 0.0;
};

/// Conjugator of the inductive construction as an evaluable function. Stage 0
/// is the base trivialization over [-1,1]^n; stage k >= 1 conjugates through
/// the ray transports of the input projector:
///
///   S_k(z) = F(z) F(y)^-1 S_{k-1}(y)          for Im z_c >= 0, y the projection
///   S_k(z) = conj(S_k(conj z))                 for Im z_c < 0
///
/// where c = n - k is the disc coordinate opened at stage k and F is the
/// origin-based Kato transport of the projector. On the real slice the formula
/// collapses to S_{k-1}, which makes the seam identity exact. All transports
/// and evaluations are cached by bit-level point identity.
class ConjugatorChain {
 public:
  static std::shared_ptr<const ConjugatorChain> base(std::shared_ptr<const MatrixField> p,
                                                     int steps, const TransportOptions& opt);
  static std::shared_ptr<const ConjugatorChain> lift(
      std::shared_ptr<const ConjugatorChain> parent);

  int stage() const { return stage_; }
  Eigen::Index rank() const;
  Eigen::Index dim() const;
  CMatrix eval(const Point& z) const;

  /// Computes every ray transport that evaluating `points` will need, running
  /// the independent per-point integrations in parallel and inserting results
  /// in grid order. Subsequent eval calls are pure cache hits; skipping the
  /// call only costs serial on-demand computation.
  void prewarm(const std::vector<Point>& points) const;

 private:
  struct Shared;
  struct PrewarmPlan;
  ConjugatorChain() = default;

  CMatrix transport(const Point& z) const;
  void collect_transport_points(const Point& z, PrewarmPlan& plan) const;

  std::shared_ptr<Shared> shared_;
  std::shared_ptr<const ConjugatorChain> parent_;
  int stage_ = 0;
  int coord_ = -1;  // coordinate opened at this stage
  mutable std::unordered_map<std::string, CMatrix> eval_cache_;
};

/// Per-stage pipeline state: the conjugator sampled on the stage grid plus the
/// evaluable chain that later stages project through.
struct StageState {
  int k = 0;
  GridMatrixFunction conjugator;
  Eigen::Index rank = 0;
  std::vector<StageReport> ledger;
  std::shared_ptr<const ConjugatorChain> chain;
};

/// Base case over [-1,1]^n in real arithmetic.
StageState diagonalize_base_real(std::shared_ptr<const MatrixField> p,
                                 std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                 const TransportOptions& opt = {});

/// One induction step: opens the next disc coordinate, trivializes the
/// conjugated projector on the half domain, and glues by reflection.
StageState lift_step(std::shared_ptr<const MatrixField> p, const StageState& prev,
                     std::shared_ptr<const ConjClosedGrid> half_grid,
                     std::shared_ptr<const ConjClosedGrid> full_grid,
                     const TransportOptions& opt = {});

/// Reflection gluing: S agrees with u on the closed upper half and takes
/// entrywise conjugates at conjugated points below, so S(conj z) = conj(S(z))
/// holds exactly at every paired grid point.
GridMatrixFunction reflect_extend(const GridMatrixFunction& u,
                                  std::shared_ptr<const ConjClosedGrid> full_grid);

struct GridParams {
  int radial = 9;
  int angular = 16;
};

struct DiagonalizeResult {
  GridMatrixFunction conjugator;  // on the closed polydisc grid
  Eigen::Index rank = 0;
  VerificationReport report;
  double min_singular_value = 0.0;
};

/// Full Theorem-1-style pipeline: base stage over [-1,1]^n followed by one
/// lift per disc coordinate. The grids of consecutive stages share real-slice
/// points bit-exactly (interval factors are the polar diameters).
DiagonalizeResult diagonalize_real_symmetric(const ExprPtr& p, int n, const GridParams& grids,
                                             int steps, const TransportOptions& opt = {});

}  // namespace pdmf::diag1
