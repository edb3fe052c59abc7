#pragma once

namespace pdmf {

/// Numerical tolerances shared across modules. `exact` bounds residuals of
/// operations that are exact up to roundoff, `resid` bounds residuals of
/// discretized computations. `singular_floor` is relative to the matrix scale.
struct Tolerances {
  double exact = 1e-10;
  double resid = 1e-6;
  double singular_floor = 1e-12;
  double seam = 1e-8;
  double branch_cut_angle = 1e-7;  // radians; eigenvalues closer to the cut are rejected
  double condition_bound = 1e8;    // transport frames above this condition number abort
};

}  // namespace pdmf
