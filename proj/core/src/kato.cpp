#include "pdmf/kato.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <utility>

namespace pdmf::kato {

namespace {

template <typename Mat, typename Rhs>
Mat integrate_linear_ode(Rhs&& g, int steps, Eigen::Index m) {
  Mat f = Mat::Identity(m, m);
  Mat g_s = g(0.0);
  for (int q = 0; q < steps; ++q) {
    const double s0 = static_cast<double>(q) / steps;
    const double s1 = static_cast<double>(q + 1) / steps;
    const double h = s1 - s0;
    const Mat g_mid = g(s0 + 0.5 * h);
    const Mat g_end = g(s1);
    const Mat k1 = g_s * f;
    const Mat k2 = g_mid * (f + (0.5 * h) * k1);
    const Mat k3 = g_mid * (f + (0.5 * h) * k2);
    const Mat k4 = g_end * (f + h * k3);
    f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g_s = g_end;
  }
  return f;
}

template <typename Mat, typename Eval>
Mat transport_impl(Eval&& projector, int steps, const TransportOptions& opt, Eigen::Index m) {
  if (steps < 16) {
    throw Error("kato_transport: need at least 16 integration steps");
  }
  const double delta = opt.fd_step;

  const auto rhs = [&](double s) -> Mat {
    const Mat p = projector(s);
    const double idem = (p * p - p).norm();
    if (idem > opt.tol.resid) {
      std::ostringstream msg;
      msg << "kato_transport: field not idempotent along the ray (s = " << s
          << ", residual " << idem << ")";
      throw NotIdempotentAlongPath(msg.str());
    }
    // Central differences with one Richardson extrapolation level.
    const Mat coarse = (projector(s + delta) - projector(s - delta)) / (2.0 * delta);
    const Mat fine = (projector(s + 0.5 * delta) - projector(s - 0.5 * delta)) / delta;
    const Mat dp = (4.0 * fine - coarse) / 3.0;
    return dp * p - p * dp;
  };

  Mat f = integrate_linear_ode<Mat>(rhs, steps, m);

  Eigen::JacobiSVD<Mat> svd(f);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > opt.tol.condition_bound) {
    throw TransportDiverged("kato_transport: frame condition number exceeds bound");
  }
  return f;
}

RMatrix realified(const CMatrix& v, const Tolerances& tol) {
  const double imag_norm = v.imag().norm();
  if (imag_norm > tol.exact) {
    std::ostringstream msg;
    msg << "field has imaginary residue " << imag_norm << " on a real point";
    throw NotRealOnRealSlice(msg.str());
  }
  return v.real();
}

template <typename Mat, typename Transport>
TransportResult trivialize_impl(const MatrixField& p,
                                std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                const TransportOptions& opt, Transport&& transport,
                                const numc::IdempotentSplit<Mat>& split) {
  const Eigen::Index m = p.dim();
  const Mat projector = [&] {
    Mat d = Mat::Zero(m, m);
    for (Eigen::Index i = 0; i < split.rank; ++i) {
      d(i, i) = 1.0;
    }
    return d;
  }();

  std::vector<CMatrix> frames;
  frames.reserve(grid->size());
  double residual = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Point& z = grid->points[i];
    const Mat f = transport(z);
    Mat v = f * split.basis;
    const Mat pz = [&] {
      if constexpr (std::is_same_v<Mat, RMatrix>) {
        return realified(p.at(z), opt.tol);
      } else {
        return p.at(z);
      }
    }();
    const double idem = (pz * pz - pz).norm();
    if (idem > opt.tol.resid) {
      throw NotIdempotent("trivialize_idempotent: input not idempotent on the grid");
    }
    const Mat conj_resid = v.partialPivLu().solve(pz * v) - projector;
    residual = std::max(residual, conj_resid.norm());
    if constexpr (std::is_same_v<Mat, RMatrix>) {
      frames.push_back(v.template cast<Complex>());
    } else {
      frames.push_back(std::move(v));
    }
  }
  return TransportResult{GridMatrixFunction(std::move(grid), std::move(frames)), split.rank,
                         residual};
}

}  // namespace

ExprField::ExprField(ExprPtr f, Tolerances tol)
    : ExprField(f, f == nullptr ? -1 : f->nvars(), tol) {}

ExprField::ExprField(ExprPtr f, int nvars, Tolerances tol) : expr_(std::move(f)), tol_(tol) {
  if (expr_ == nullptr) {
    throw Error("ExprField: null expression");
  }
  if (expr_->rows() != expr_->cols()) {
    throw Error("ExprField: field must be square-matrix valued");
  }
  if (expr_->nvars() >= 0 && expr_->nvars() != nvars) {
    throw Error("ExprField: expression arity disagrees with the requested one");
  }
  if (nvars < 0) {
    throw Error("ExprField: variable count unknown; pass it explicitly");
  }
  nvars_ = nvars;
  dim_ = expr_->rows();
}

CMatrix ExprField::at(const Point& z) const { return expr_->evaluate(z, tol_); }

Point contract_point(const ContractionHomotopy& h, const Point& x, double s) {
  if (static_cast<int>(x.size()) != h.domain.n) {
    throw Error("contract_point: point arity mismatch");
  }
  if (s < 0.0 || s > 1.0) {
    throw Error("contract_point: homotopy parameter outside [0, 1]");
  }
  return funcrep::scaled(x, s);
}

CMatrix kato_transport(const MatrixField& p, const Point& x, int steps,
                       const TransportOptions& opt) {
  return transport_impl<CMatrix>(
      [&](double s) { return p.at(funcrep::scaled(x, s)); }, steps, opt, p.dim());
}

RMatrix kato_transport_real(const MatrixField& p, const Point& x, int steps,
                            const TransportOptions& opt) {
  return transport_impl<RMatrix>(
      [&](double s) { return realified(p.at(funcrep::scaled(x, s)), opt.tol); }, steps, opt,
      p.dim());
}

TransportResult trivialize_idempotent(const MatrixField& p,
                                      std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                      const TransportOptions& opt) {
  if (grid == nullptr) {
    throw Error("trivialize_idempotent: null grid");
  }
  const auto split = numc::idempotent_split(p.at(funcrep::origin(p.nvars())), opt.tol);
  return trivialize_impl<CMatrix>(
      p, std::move(grid), steps, opt,
      [&](const Point& z) { return kato_transport(p, z, steps, opt); }, split);
}

TransportResult trivialize_idempotent_real(const MatrixField& p,
                                           std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                           const TransportOptions& opt) {
  if (grid == nullptr) {
    throw Error("trivialize_idempotent: null grid");
  }
  const Point o = funcrep::origin(p.nvars());
  const auto split = numc::idempotent_split(realified(p.at(o), opt.tol), opt.tol);
  return trivialize_impl<RMatrix>(
      p, std::move(grid), steps, opt,
      [&](const Point& z) { return kato_transport_real(p, z, steps, opt); }, split);
}

}  // namespace pdmf::kato
