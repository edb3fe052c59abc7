#include "pdmf/factor2.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>
#include <utility>

namespace pdmf::factor2 {

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix inverse_along_path(const CMatrix& a, const Tolerances& tol, double t,
                           const std::string& where) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= tol.singular_floor * scale) {
    std::ostringstream msg;
    msg << "factorize: function singular along the homotopy at t = " << t << where;
    throw SingularAlongPath(msg.str());
  }
  return lu.inverse();
}

CMatrix integrate_factor(const ExprPtr& u, const Point& z, const FactorizationConfig& cfg,
                         const CMatrix& v0, const std::string& where) {
  const double delta = cfg.fd_step;
  const auto rhs = [&](double t) -> CMatrix {
    const CMatrix du = (u->evaluate(funcrep::scaled(z, t + delta), cfg.tol) -
                        u->evaluate(funcrep::scaled(z, t - delta), cfg.tol)) /
                       (2.0 * delta);
    const CMatrix ut_inv =
        inverse_along_path(u->evaluate(funcrep::scaled(z, t), cfg.tol), cfg.tol, t, where);
    return 0.5 * du * ut_inv;
  };

  const int steps = cfg.ode_steps;
  CMatrix v = v0;
  CMatrix g_s = rhs(0.0);
  for (int q = 0; q < steps; ++q) {
    const double t0 = static_cast<double>(q) / steps;
    const double t1 = static_cast<double>(q + 1) / steps;
    const double h = t1 - t0;
    const CMatrix g_mid = rhs(t0 + 0.5 * h);
    const CMatrix g_end = rhs(t1);
    const CMatrix k1 = g_s * v;
    const CMatrix k2 = g_mid * (v + (0.5 * h) * k1);
    const CMatrix k3 = g_mid * (v + (0.5 * h) * k2);
    const CMatrix k4 = g_end * (v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g_s = g_end;
  }
  return v;
}

}  // namespace

double star_relation_residual(const ExprPtr& u, const ConjClosedGrid& grid,
                              const Tolerances& tol) {
  if (!grid.fully_paired()) {
    throw GridMismatch("star_relation_residual: grid is not conjugation-closed");
  }
  const std::vector<CMatrix> vals = funcrep::evaluate_on_grid(u, grid, tol);
  const CMatrix identity = CMatrix::Identity(vals.front().rows(), vals.front().cols());
  double worst = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    worst = std::max(worst, (vals[i] * vals[grid.conj_index[i]].conjugate() - identity).norm());
  }
  return worst;
}

CMatrix initial_factor(const CMatrix& u0, const FactorizationConfig& cfg) {
  if (u0.rows() != u0.cols()) {
    throw Error("initial_factor: matrix must be square");
  }
  const Eigen::Index m = u0.rows();
  const CMatrix identity = CMatrix::Identity(m, m);

  const double star_resid = (u0 * u0.conjugate() - identity).norm();
  if (star_resid > cfg.tol.resid) {
    throw StarRelationViolated("initial_factor: ||u0 * conj(u0) - I|| = " +
                               std::to_string(star_resid));
  }

  const numc::BranchAngle branch = cfg.branch ? *cfg.branch : numc::auto_branch(u0, cfg.tol);
  const CMatrix log_u0 = numc::mat_logm(u0, branch, cfg.tol);
  const RMatrix x = log_u0.real();
  const RMatrix y = log_u0.imag();

  const double commute = (x * y - y * x).norm();
  if (commute > cfg.tol.resid) {
    throw StarRelationViolated("initial_factor: real and imaginary parts of log u0 fail to "
                               "commute (residual " +
                               std::to_string(commute) + ")");
  }
  const double x_norm = x.norm();
  if (x_norm > cfg.tol.resid) {
    throw StarRelationViolated("initial_factor: ||Re log u0|| = " + std::to_string(x_norm) +
                               ", the star relation forces it to vanish");
  }

  const CMatrix v0 = numc::mat_expm(CMatrix(Complex(0.0, 0.5) * y.cast<Complex>()));
  const CMatrix rebuilt = v0 * numc::mat_inv(CMatrix(v0.conjugate()), cfg.tol);
  const double rebuild_resid = (rebuilt - u0).norm();
  if (rebuild_resid > cfg.tol.resid) {
    throw StarRelationViolated("initial_factor: reconstruction residual " +
                               std::to_string(rebuild_resid));
  }
  return v0;
}

CMatrix ode_factorize_point(const ExprPtr& u, const Point& z, const FactorizationConfig& cfg) {
  if (u == nullptr) {
    throw Error("ode_factorize_point: null expression");
  }
  if (cfg.ode_steps < 16) {
    throw Error("ode_factorize_point: need at least 16 integration steps");
  }
  const CMatrix v0 = initial_factor(u->evaluate(funcrep::origin(static_cast<int>(z.size())),
                                                cfg.tol),
                                    cfg);
  return integrate_factor(u, z, cfg, v0, "");
}

// The grid must be the tensor construction of build_grid with the given polar
// layout; anything else reports -1.
double holomorphy_diagnostic(const GridMatrixFunction& v, int radial, int angular) {
  const auto& grid = *v.grid;
  const int n = grid.domain.n;
  const int k = grid.domain.k;
  if (radial < 3 || angular < 4 || k == 0 || grid.domain.half) {
    return -1.0;
  }
  // Factor sizes of the tensor layout: interval factors first, then k polar
  // factors of radial*angular points each.
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n));
  const std::size_t polar_size =
      static_cast<std::size_t>(radial) * static_cast<std::size_t>(angular);
  std::size_t expect = 1;
  std::size_t interval_size = 0;
  if (k < n) {
    // Infer the interval factor size from the total point count.
    std::size_t rest = 1;
    for (int c = 0; c < k; ++c) {
      rest *= polar_size;
    }
    if (grid.size() % rest != 0) {
      return -1.0;
    }
    const double root = std::pow(static_cast<double>(grid.size() / rest),
                                 1.0 / static_cast<double>(n - k));
    interval_size = static_cast<std::size_t>(std::llround(root));
  }
  for (int c = 0; c < n; ++c) {
    sizes[static_cast<std::size_t>(c)] =
        (c < grid.domain.first_disc()) ? interval_size : polar_size;
    expect *= sizes[static_cast<std::size_t>(c)];
  }
  if (expect != grid.size()) {
    return -1.0;
  }

  const double dr = 1.0 / (radial - 1);
  const double dtheta = 2.0 * kPi / angular;

  // Strides of the odometer layout (first coordinate slowest).
  std::vector<std::size_t> stride(static_cast<std::size_t>(n), 1);
  for (int c = n - 2; c >= 0; --c) {
    stride[static_cast<std::size_t>(c)] =
        stride[static_cast<std::size_t>(c + 1)] * sizes[static_cast<std::size_t>(c + 1)];
  }

  double worst = 0.0;
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    for (int c = grid.domain.first_disc(); c < n; ++c) {
      const std::size_t sc = stride[static_cast<std::size_t>(c)];
      const std::size_t local = (flat / sc) % polar_size;
      const int i = static_cast<int>(local) / angular;  // radius index
      const int j = static_cast<int>(local) % angular;  // angle index
      if (i <= 0 || i >= radial - 1) {
        continue;  // need radial neighbors and r > 0
      }
      const std::size_t base = flat - local * sc;
      const auto at = [&](int ii, int jj) -> const CMatrix& {
        const std::size_t loc =
            static_cast<std::size_t>(ii) * static_cast<std::size_t>(angular) +
            static_cast<std::size_t>(jj);
        return v.values[base + loc * sc];
      };
      const int jp = (j + 1) % angular;
      const int jm = (j + angular - 1) % angular;
      const CMatrix d_r = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dr);
      const CMatrix d_theta = (at(i, jp) - at(i, jm)) / (2.0 * dtheta);
      const double r = static_cast<double>(i) * dr;
      const double theta = dtheta * j;
      const Complex phase = std::polar(0.5, theta);
      const CMatrix dbar = phase * (d_r + (Complex(0.0, 1.0) / r) * d_theta);
      worst = std::max(worst, dbar.norm());
    }
  }
  return worst;
}

FactorizationResult factorize_symmetric(const ExprPtr& u,
                                        std::shared_ptr<const ConjClosedGrid> grid,
                                        const FactorizationConfig& cfg) {
  if (u == nullptr || grid == nullptr) {
    throw Error("factorize_symmetric: null input");
  }
  if (cfg.ode_steps < 16) {
    throw Error("factorize_symmetric: need at least 16 integration steps");
  }

  FactorizationReport report;
  report.star_residual = star_relation_residual(u, *grid, cfg.tol);
  if (report.star_residual > cfg.tol.resid) {
    throw StarRelationViolated("factorize_symmetric: star relation residual " +
                               std::to_string(report.star_residual));
  }

  const int n = grid->domain.n;
  const CMatrix v0 = initial_factor(u->evaluate(funcrep::origin(n), cfg.tol), cfg);

  // Per-point integrations are independent; results land in grid order.
  std::vector<CMatrix> factors(grid->size());
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(grid->size()));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < grid->size(); i += workers) {
          std::ostringstream where;
          where << " (grid point " << i << ")";
          factors[i] = integrate_factor(u, grid->points[i], cfg, v0, where.str());
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) {
    th.join();
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }

  const std::vector<CMatrix> u_vals = funcrep::evaluate_on_grid(u, *grid, cfg.tol);
  double reconstruction = 0.0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const CMatrix mate_conj = factors[grid->conj_index[i]].conjugate();
    const CMatrix rebuilt =
        factors[i] * inverse_along_path(mate_conj, cfg.tol, 1.0, " (reconstruction)");
    reconstruction = std::max(reconstruction, (u_vals[i] - rebuilt).norm());
  }
  report.reconstruction_residual = reconstruction;

  GridMatrixFunction v(std::move(grid), std::move(factors));
  report.min_singular_value = funcrep::invertibility_margin(v);
  report.holomorphy_diag = holomorphy_diagnostic(v, cfg.grid_radial, cfg.grid_angular);
  return FactorizationResult{std::move(v), report};
}

SymmetricBasis symmetric_basis_coefficients(const GridMatrixFunction& v, const Tolerances& tol) {
  if (v.grid == nullptr) {
    throw Error("symmetric_basis_coefficients: missing grid");
  }
  const auto& grid = *v.grid;
  if (!grid.fully_paired()) {
    throw GridMismatch("symmetric_basis_coefficients: grid is not conjugation-closed");
  }

  std::vector<CMatrix> a_vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMatrix mate_conj = v.values[grid.conj_index[i]].conjugate();
    Eigen::PartialPivLU<CMatrix> lu(mate_conj);
    const double scale = std::max(mate_conj.cwiseAbs().maxCoeff(), 1.0);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= tol.singular_floor * scale) {
      throw SingularAtPoint("symmetric_basis_coefficients: factor singular at a grid point");
    }
    a_vals[i] = lu.inverse();
  }
  // b(z) = conj(a(conj z)), exact at every pair by construction.
  std::vector<CMatrix> b_vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    b_vals[i] = a_vals[grid.conj_index[i]].conjugate();
  }

  double consistency = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMatrix u_rec = v.values[i] * a_vals[i];
    consistency = std::max(consistency, (a_vals[i] + b_vals[i] * u_rec - 2.0 * a_vals[i]).norm());
  }

  SymmetricBasis out;
  out.a = GridMatrixFunction(v.grid, std::move(a_vals));
  out.b = GridMatrixFunction(v.grid, std::move(b_vals));
  out.consistency = consistency;
  return out;
}

}  // namespace pdmf::factor2
