#include "pdmf/numc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace pdmf::numc {

namespace {

constexpr double kPi = std::numbers::pi;

void require_square(const Eigen::Index rows, const Eigen::Index cols, const char* op) {
  if (rows != cols) {
    throw Error(std::string(op) + ": matrix must be square");
  }
}

// [13/13] Pade coefficients (Higham, "Functions of Matrices", Table 10.4 scale).
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// One-norm threshold below which the [13/13] approximant is at machine accuracy.
constexpr double kPadeTheta13 = 5.371920351148152;

template <typename Mat>
Mat expm_impl(const Mat& a) {
  require_square(a.rows(), a.cols(), "mat_expm");
  const Eigen::Index m = a.rows();
  const Mat identity = Mat::Identity(m, m);

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) {
    return identity;
  }
  int squarings = 0;
  if (norm1 > kPadeTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kPadeTheta13)));
  }
  const Mat as = a / std::pow(2.0, squarings);

  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;

  const Mat u = as * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
                      kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
                      kPade13[1] * identity);
  const Mat v = a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
                kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 +
                kPade13[0] * identity;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

template <typename Mat>
Mat inv_impl(const Mat& a, const Tolerances& tol) {
  require_square(a.rows(), a.cols(), "mat_inv");
  const double scale = a.norm();
  Eigen::JacobiSVD<Mat> svd(a);
  const double sigma_min = svd.singularValues().minCoeff();
  if (sigma_min <= tol.singular_floor * std::max(scale, 1.0)) {
    throw SingularMatrix("mat_inv: smallest singular value " + std::to_string(sigma_min) +
                         " below floor");
  }
  return a.partialPivLu().solve(Mat::Identity(a.rows(), a.cols()));
}

double wrap_angle(double a) {
  // Representative in [0, 2*pi).
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) {
    a += 2.0 * kPi;
  }
  return a;
}

double angular_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, 2.0 * kPi - d);
}

Eigen::VectorXcd eigenvalues_of(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw SingularMatrix("eigenvalue computation failed");
  }
  return solver.eigenvalues();
}

template <typename Mat>
void canonicalize_column_phases(Mat& w) {
  using Scalar = typename Mat::Scalar;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    // First entry within roundoff of the column maximum, so that ties in
    // magnitude do not flip the orientation.
    const double max_mag = w.col(j).cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (std::abs(w(i, j)) >= (1.0 - 1e-9) * max_mag) {
        pivot = i;
        break;
      }
    }
    const Scalar v = w(pivot, j);
    const double mag = std::abs(v);
    if (mag > 0.0) {
      w.col(j) *= (Scalar(mag) / v);
    }
  }
}

template <typename Mat>
IdempotentSplit<Mat> split_impl(const Mat& a, const Tolerances& tol) {
  require_square(a.rows(), a.cols(), "idempotent_split");
  const Eigen::Index m = a.rows();

  const double idem_resid = (a * a - a).norm();
  if (idem_resid > tol.resid) {
    throw NotIdempotent("idempotent_split: ||a^2 - a|| = " + std::to_string(idem_resid));
  }

  const double trace_re = std::real(Complex(a.trace()));
  const auto rank = static_cast<Eigen::Index>(std::llround(trace_re));
  if (rank < 0 || rank > m || std::abs(trace_re - static_cast<double>(rank)) > tol.resid) {
    throw NotIdempotent("idempotent_split: trace " + std::to_string(trace_re) +
                        " is not close to an admissible integer rank");
  }

  // Spectrum of an idempotent is {0, 1}; assign each eigenvalue to the nearer
  // cluster and reject anything further than 0.1 from both.
  const Eigen::VectorXcd lambda = eigenvalues_of(a.template cast<Complex>());
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d0 = std::abs(lambda[i]);
    const double d1 = std::abs(lambda[i] - Complex(1.0));
    if (std::min(d0, d1) > 0.1) {
      throw IllConditionedSplit("idempotent_split: eigenvalue not clustered at {0,1}");
    }
    if (d1 < d0) {
      ++ones;
    }
  }
  if (ones != rank) {
    throw IllConditionedSplit("idempotent_split: eigenvalue cluster sizes disagree with trace");
  }

  // Columns of the basis: orthonormal basis of range(a) followed by an
  // orthonormal basis of range(I - a) = null(a).
  Mat w(m, m);
  {
    Eigen::ColPivHouseholderQR<Mat> qr(a);
    const Mat q = qr.householderQ();
    w.leftCols(rank) = q.leftCols(rank);
  }
  {
    const Mat complement = Mat::Identity(m, m) - a;
    Eigen::ColPivHouseholderQR<Mat> qr(complement);
    const Mat q = qr.householderQ();
    w.rightCols(m - rank) = q.leftCols(m - rank);
  }
  canonicalize_column_phases(w);

  Mat projector = Mat::Zero(m, m);
  for (Eigen::Index i = 0; i < rank; ++i) {
    projector(i, i) = 1.0;
  }
  const Mat conj_resid = w.partialPivLu().solve(a * w) - projector;
  if (conj_resid.norm() > tol.resid) {
    throw IllConditionedSplit("idempotent_split: conjugation residual " +
                              std::to_string(conj_resid.norm()));
  }
  return {std::move(w), rank};
}

}  // namespace

CMatrix mat_inv(const CMatrix& a, const Tolerances& tol) { return inv_impl(a, tol); }
RMatrix mat_inv(const RMatrix& a, const Tolerances& tol) { return inv_impl(a, tol); }

CMatrix mat_expm(const CMatrix& a) { return expm_impl(a); }
RMatrix mat_expm(const RMatrix& a) { return expm_impl(a); }

CMatrix mat_logm(const CMatrix& a, BranchAngle branch, const Tolerances& tol) {
  require_square(a.rows(), a.cols(), "mat_logm");
  const Eigen::Index m = a.rows();
  const double scale = std::max(a.norm(), 1.0);

  Eigen::ComplexEigenSolver<CMatrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw SingularMatrix("mat_logm: eigendecomposition failed");
  }
  const Eigen::VectorXcd lambda = solver.eigenvalues();
  const CMatrix vectors = solver.eigenvectors();

  {
    Eigen::JacobiSVD<CMatrix> svd(vectors);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-12 * smax) {
      throw SingularMatrix("mat_logm: nearly defective input (eigenvector basis ill-conditioned)");
    }
  }

  const double cut_direction = branch.theta + kPi;
  const Complex rotate = std::polar(1.0, -branch.theta);
  Eigen::VectorXcd log_lambda(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mag = std::abs(lambda[i]);
    if (mag <= tol.singular_floor * scale) {
      throw SingularMatrix("mat_logm: eigenvalue at the origin");
    }
    if (angular_distance(std::arg(lambda[i]), cut_direction) < tol.branch_cut_angle) {
      throw EigenvalueOnBranchCut("mat_logm: eigenvalue within tolerance of the cut ray");
    }
    // Scalar log with the argument rebased into (theta - pi, theta + pi].
    const double arg = branch.theta + std::arg(lambda[i] * rotate);
    log_lambda[i] = Complex(std::log(mag), arg);
  }

  const CMatrix result =
      vectors * log_lambda.asDiagonal() * vectors.partialPivLu().inverse();
  const double roundtrip = (mat_expm(result) - a).norm();
  if (roundtrip > tol.resid) {
    throw SingularMatrix("mat_logm: exp round-trip residual " + std::to_string(roundtrip));
  }
  return result;
}

BranchAngle auto_branch(const CMatrix& a, const Tolerances& tol) {
  require_square(a.rows(), a.cols(), "auto_branch");
  const Eigen::VectorXcd lambda = eigenvalues_of(a);
  const double scale = std::max(a.norm(), 1.0);

  std::vector<double> args;
  args.reserve(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i]) <= tol.singular_floor * scale) {
      throw SingularMatrix("auto_branch: eigenvalue at the origin");
    }
    args.push_back(wrap_angle(std::arg(lambda[i])));
  }
  std::sort(args.begin(), args.end());
  args.erase(std::unique(args.begin(), args.end()), args.end());

  // Midpoint of the widest gap between consecutive eigenvalue arguments,
  // preferring the candidate nearest the negative real axis on ties.
  double best_mid = kPi;
  double best_gap = -1.0;
  double best_dist = 0.0;
  const std::size_t count = args.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = args[i];
    const double hi = (i + 1 < count) ? args[i + 1] : args[0] + 2.0 * kPi;
    const double gap = hi - lo;
    const double mid = wrap_angle(0.5 * (lo + hi));
    const double dist = angular_distance(mid, kPi);
    if (gap > best_gap + 1e-12 || (std::abs(gap - best_gap) <= 1e-12 && dist < best_dist)) {
      best_gap = gap;
      best_mid = mid;
      best_dist = dist;
    }
  }
  if (best_gap <= 2.0 * tol.branch_cut_angle) {
    throw EigenvalueOnBranchCut("auto_branch: spectrum leaves no angular gap for the cut");
  }
  return BranchAngle{wrap_angle(best_mid - kPi)};
}

IdempotentSplit<CMatrix> idempotent_split(const CMatrix& a, const Tolerances& tol) {
  return split_impl(a, tol);
}

IdempotentSplit<RMatrix> idempotent_split(const RMatrix& a, const Tolerances& tol) {
  return split_impl(a, tol);
}

CMatrix rank_projector(Eigen::Index m, Eigen::Index rank) {
  CMatrix p = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < rank; ++i) {
    p(i, i) = 1.0;
  }
  return p;
}

RMatrix rank_projector_real(Eigen::Index m, Eigen::Index rank) {
  RMatrix p = RMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < rank; ++i) {
    p(i, i) = 1.0;
  }
  return p;
}

}  // namespace pdmf::numc
