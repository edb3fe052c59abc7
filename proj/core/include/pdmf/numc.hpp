#pragma once

#include <Eigen/Dense>
#include <complex>

#include "pdmf/config.hpp"
#include "pdmf/errors.hpp"

namespace pdmf::numc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Branch selector for the matrix logarithm. The cut is the ray
/// e^{i*theta}*(-inf, 0], i.e. the half line in direction theta + pi; the
/// eigenvalue arguments of the returned logarithm lie in (theta - pi, theta + pi].
struct BranchAngle {
  double theta = 0.0;
};

/// Inverse with an explicit smallest-singular-value guard.
/// Throws SingularMatrix when sigma_min <= singular_floor * ||a||.
CMatrix mat_inv(const CMatrix& a, const Tolerances& tol = {});
RMatrix mat_inv(const RMatrix& a, const Tolerances& tol = {});

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
CMatrix mat_expm(const CMatrix& a);
RMatrix mat_expm(const RMatrix& a);

/// Matrix logarithm on the branch selected by `branch`, computed from the
/// complex eigendecomposition with the scalar logarithm rebased so that every
/// eigenvalue argument falls in (theta - pi, theta + pi].
/// Throws EigenvalueOnBranchCut if an eigenvalue sits within
/// tol.branch_cut_angle of the cut ray, SingularMatrix on (near-)singular or
/// nearly defective input.
CMatrix mat_logm(const CMatrix& a, BranchAngle branch, const Tolerances& tol = {});

/// Branch angle whose cut direction bisects the widest angular gap between
/// eigenvalue arguments; ties go to the cut closest to the negative real axis
/// so the choice degrades to the principal branch whenever possible.
BranchAngle auto_branch(const CMatrix& a, const Tolerances& tol = {});

template <typename Mat>
struct IdempotentSplit {
  Mat basis;            // invertible w with w^-1 * a * w = diag(I_rank, 0)
  Eigen::Index rank{};  // = round(Re trace a)
};

/// Similarity transform taking an idempotent to diag(I_rank, 0). The basis
/// columns are orthonormal bases of range(a) and range(I - a), with column
/// phases canonicalized so the largest entry of each column is real positive.
/// Throws NotIdempotent when ||a^2 - a|| > tol.resid, IllConditionedSplit when
/// the spectrum does not cluster at {0, 1} within 0.1 or the residual check fails.
IdempotentSplit<CMatrix> idempotent_split(const CMatrix& a, const Tolerances& tol = {});
IdempotentSplit<RMatrix> idempotent_split(const RMatrix& a, const Tolerances& tol = {});

/// diag(I_rank, 0) as a dense matrix.
CMatrix rank_projector(Eigen::Index m, Eigen::Index rank);
RMatrix rank_projector_real(Eigen::Index m, Eigen::Index rank);

}  // namespace pdmf::numc

namespace pdmf {
using numc::CMatrix;
using numc::Complex;
using numc::RMatrix;
}  // namespace pdmf
