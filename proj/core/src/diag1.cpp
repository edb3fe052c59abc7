#include "pdmf/diag1.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>
#include <utility>

namespace pdmf::diag1 {

namespace {

using funcrep::point_key;

CMatrix guarded_inverse(const CMatrix& a, const Tolerances& tol, const char* what) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= tol.singular_floor * scale) {
    throw SingularMatrix(std::string(what) + ": singular frame");
  }
  return lu.inverse();
}

double conjugation_residual(const CMatrix& s, const CMatrix& p, const CMatrix& projector,
                            const Tolerances& tol) {
  Eigen::PartialPivLU<CMatrix> lu(s);
  const double scale = std::max(s.cwiseAbs().maxCoeff(), 1.0);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= tol.singular_floor * scale) {
    throw SingularMatrix("conjugator is singular at a grid point");
  }
  return (lu.solve(p * s) - projector).norm();
}

}  // namespace

struct ConjugatorChain::Shared {
  std::shared_ptr<const MatrixField> p;
  int steps = 200;
  TransportOptions opt;
  int nvars = 0;
  numc::IdempotentSplit<RMatrix> split;
  CMatrix basis;  // split.basis cast to complex
  mutable std::unordered_map<std::string, CMatrix> transports;
  mutable std::unordered_map<std::string, RMatrix> transports_real;
};

std::shared_ptr<const ConjugatorChain> ConjugatorChain::base(
    std::shared_ptr<const MatrixField> p, int steps, const TransportOptions& opt) {
  if (p == nullptr) {
    throw Error("ConjugatorChain: null field");
  }
  auto shared = std::make_shared<Shared>();
  shared->p = std::move(p);
  shared->steps = steps;
  shared->opt = opt;
  shared->nvars = shared->p->nvars();

  const Point o = funcrep::origin(shared->nvars);
  const CMatrix p0 = shared->p->at(o);
  if (p0.imag().norm() > opt.tol.exact) {
    throw NotRealOnRealSlice("projector is not real at the origin");
  }
  shared->split = numc::idempotent_split(RMatrix(p0.real()), opt.tol);
  shared->basis = shared->split.basis.cast<Complex>();

  auto chain = std::shared_ptr<ConjugatorChain>(new ConjugatorChain());
  chain->shared_ = std::move(shared);
  chain->stage_ = 0;
  return chain;
}

std::shared_ptr<const ConjugatorChain> ConjugatorChain::lift(
    std::shared_ptr<const ConjugatorChain> parent) {
  if (parent == nullptr) {
    throw Error("ConjugatorChain: null parent");
  }
  const int next_stage = parent->stage_ + 1;
  if (next_stage > parent->shared_->nvars) {
    throw Error("ConjugatorChain: no coordinate left to open");
  }
  auto chain = std::shared_ptr<ConjugatorChain>(new ConjugatorChain());
  chain->shared_ = parent->shared_;
  chain->stage_ = next_stage;
  chain->coord_ = parent->shared_->nvars - next_stage;
  chain->parent_ = std::move(parent);
  return chain;
}

Eigen::Index ConjugatorChain::rank() const { return shared_->split.rank; }

Eigen::Index ConjugatorChain::dim() const { return shared_->p->dim(); }

struct ConjugatorChain::PrewarmPlan {
  std::unordered_set<std::string> seen_complex;
  std::unordered_set<std::string> seen_real;
  std::vector<Point> complex_points;
  std::vector<Point> real_points;
};

namespace {

// Runs f over the points on all cores; results land in input order so cache
// insertion (and therefore every later computation) is order-independent.
template <typename Mat, typename F>
void parallel_transports(const std::vector<Point>& points, F&& f,
                         std::unordered_map<std::string, Mat>& cache) {
  std::vector<Mat> results(points.size());
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(points.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      results[i] = f(points[i]);
    }
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      threads.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < points.size(); i += workers) {
            results[i] = f(points[i]);
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
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    cache.emplace(funcrep::point_key(points[i]), std::move(results[i]));
  }
}

}  // namespace

void ConjugatorChain::collect_transport_points(const Point& z, PrewarmPlan& plan) const {
  if (eval_cache_.find(point_key(z)) != eval_cache_.end()) {
    return;
  }
  if (stage_ == 0) {
    const std::string key = point_key(z);
    if (shared_->transports_real.find(key) == shared_->transports_real.end() &&
        plan.seen_real.insert(key).second) {
      plan.real_points.push_back(z);
    }
    return;
  }
  const std::size_t c = static_cast<std::size_t>(coord_);
  const double b = z[c].imag();
  if (b < 0.0) {
    collect_transport_points(funcrep::conjugate(z), plan);
    return;
  }
  if (b == 0.0) {
    parent_->collect_transport_points(z, plan);
    return;
  }
  Point y = z;
  y[c] = Complex(z[c].real(), 0.0);
  const auto want = [&](const Point& pt) {
    const std::string key = point_key(pt);
    if (shared_->transports.find(key) == shared_->transports.end() &&
        plan.seen_complex.insert(key).second) {
      plan.complex_points.push_back(pt);
    }
  };
  want(z);
  want(y);
  parent_->collect_transport_points(y, plan);
}

void ConjugatorChain::prewarm(const std::vector<Point>& points) const {
  PrewarmPlan plan;
  for (const Point& z : points) {
    collect_transport_points(z, plan);
  }
  parallel_transports(
      plan.complex_points,
      [this](const Point& z) {
        return kato::kato_transport(*shared_->p, z, shared_->steps, shared_->opt);
      },
      shared_->transports);
  parallel_transports(
      plan.real_points,
      [this](const Point& z) {
        return kato::kato_transport_real(*shared_->p, z, shared_->steps, shared_->opt);
      },
      shared_->transports_real);
}

CMatrix ConjugatorChain::transport(const Point& z) const {
  const std::string key = point_key(z);
  auto it = shared_->transports.find(key);
  if (it != shared_->transports.end()) {
    return it->second;
  }
  CMatrix f = kato::kato_transport(*shared_->p, z, shared_->steps, shared_->opt);
  return shared_->transports.emplace(std::move(key), std::move(f)).first->second;
}

CMatrix ConjugatorChain::eval(const Point& z) const {
  if (static_cast<int>(z.size()) != shared_->nvars) {
    throw Error("ConjugatorChain::eval: point arity mismatch");
  }
  if (stage_ == 0) {
    // Base stage: real-arithmetic transport from the origin.
    const std::string key = point_key(z);
    auto it = eval_cache_.find(key);
    if (it != eval_cache_.end()) {
      return it->second;
    }
    for (const Complex& c : z) {
      if (c.imag() != 0.0) {
        throw NotRealOnRealSlice("base conjugator evaluated off the real slice");
      }
    }
    auto rt = shared_->transports_real.find(key);
    if (rt == shared_->transports_real.end()) {
      RMatrix f = kato::kato_transport_real(*shared_->p, z, shared_->steps, shared_->opt);
      rt = shared_->transports_real.emplace(key, std::move(f)).first;
    }
    CMatrix v = (rt->second * shared_->split.basis).cast<Complex>();
    return eval_cache_.emplace(key, std::move(v)).first->second;
  }

  const std::string key = point_key(z);
  auto it = eval_cache_.find(key);
  if (it != eval_cache_.end()) {
    return it->second;
  }
  const std::size_t c = static_cast<std::size_t>(coord_);
  const double b = z[c].imag();
  CMatrix result;
  if (b < 0.0) {
    result = eval(funcrep::conjugate(z)).conjugate();
  } else if (b == 0.0) {
    result = parent_->eval(z);
  } else {
    Point y = z;
    y[c] = Complex(z[c].real(), 0.0);
    const CMatrix fz = transport(z);
    const CMatrix fy_inv = guarded_inverse(transport(y), shared_->opt.tol, "ConjugatorChain");
    result = fz * fy_inv * parent_->eval(y);
  }
  return eval_cache_.emplace(std::move(key), std::move(result)).first->second;
}

StageState diagonalize_base_real(std::shared_ptr<const MatrixField> p,
                                 std::shared_ptr<const ConjClosedGrid> grid, int steps,
                                 const TransportOptions& opt) {
  if (grid == nullptr || grid->domain.k != 0) {
    throw GridMismatch("diagonalize_base_real: expected a grid over [-1,1]^n");
  }
  auto base = ConjugatorChain::base(p, steps, opt);
  base->prewarm(grid->points);

  const Eigen::Index m = p->dim();
  const CMatrix projector = numc::rank_projector(m, base->rank());

  std::vector<CMatrix> values;
  values.reserve(grid->size());
  double residual = 0.0;
  for (const Point& z : grid->points) {
    const CMatrix pz = p->at(z);
    if (pz.imag().norm() > opt.tol.exact) {
      throw NotRealOnRealSlice("stage 0: projector is not real on the base domain");
    }
    if ((pz * pz - pz).norm() > opt.tol.resid) {
      throw NotIdempotent("stage 0: projector is not idempotent on the grid");
    }
    CMatrix v = base->eval(z);
    residual = std::max(residual, conjugation_residual(v, pz, projector, opt.tol));
    values.push_back(std::move(v));
  }

  StageState state;
  state.k = 0;
  state.conjugator = GridMatrixFunction(std::move(grid), std::move(values));
  state.rank = base->rank();
  state.ledger = {StageReport{0, state.rank, residual, 0.0}};
  state.chain = std::move(base);
  return state;
}

GridMatrixFunction reflect_extend(const GridMatrixFunction& u,
                                  std::shared_ptr<const ConjClosedGrid> full_grid) {
  if (u.grid == nullptr || full_grid == nullptr) {
    throw GridMismatch("reflect_extend: missing grid");
  }
  const auto& half = *u.grid;
  if (!half.domain.half || full_grid->domain.half ||
      half.domain.n != full_grid->domain.n || half.domain.k != full_grid->domain.k) {
    throw GridMismatch("reflect_extend: grids do not describe matching half/full domains");
  }
  const std::size_t c = static_cast<std::size_t>(full_grid->domain.first_disc());

  std::unordered_map<std::string, std::size_t> half_index;
  half_index.reserve(half.size());
  for (std::size_t i = 0; i < half.size(); ++i) {
    half_index.emplace(point_key(half.points[i]), i);
  }
  const auto lookup = [&](const Point& z) -> std::size_t {
    auto it = half_index.find(point_key(z));
    if (it == half_index.end()) {
      throw GridMismatch("reflect_extend: full-grid point has no counterpart in the half grid");
    }
    return it->second;
  };

  std::vector<CMatrix> values;
  values.reserve(full_grid->size());
  for (const Point& z : full_grid->points) {
    if (z[c].imag() >= 0.0) {
      values.push_back(u.values[lookup(z)]);
    } else {
      values.push_back(u.values[lookup(funcrep::conjugate(z))].conjugate());
    }
  }
  return GridMatrixFunction(std::move(full_grid), std::move(values));
}

StageState lift_step(std::shared_ptr<const MatrixField> p, const StageState& prev,
                     std::shared_ptr<const ConjClosedGrid> half_grid,
                     std::shared_ptr<const ConjClosedGrid> full_grid,
                     const TransportOptions& opt) {
  if (p == nullptr || prev.chain == nullptr) {
    throw Error("lift_step: missing projector or previous stage");
  }
  const int k_next = prev.k + 1;
  if (half_grid == nullptr || full_grid == nullptr || !half_grid->domain.half ||
      full_grid->domain.half || half_grid->domain.k != k_next ||
      full_grid->domain.k != k_next || half_grid->domain.n != full_grid->domain.n) {
    throw GridMismatch("lift_step: stage grids do not describe the expected domains");
  }

  auto chain = ConjugatorChain::lift(prev.chain);
  chain->prewarm(half_grid->points);
  const std::size_t c = static_cast<std::size_t>(full_grid->domain.first_disc());
  const Eigen::Index m = p->dim();
  const CMatrix projector = numc::rank_projector(m, prev.rank);

  std::unordered_map<std::string, std::size_t> prev_index;
  prev_index.reserve(prev.conjugator.grid->size());
  for (std::size_t i = 0; i < prev.conjugator.grid->size(); ++i) {
    prev_index.emplace(point_key(prev.conjugator.grid->points[i]), i);
  }

  std::vector<CMatrix> u_values;
  u_values.reserve(half_grid->size());
  double seam = 0.0;
  for (std::size_t i = 0; i < half_grid->size(); ++i) {
    const Point& z = half_grid->points[i];

    // Rank matching: the pointwise rank (trace) of the projector must agree
    // with the inductive rank at every point of the opened domain.
    const CMatrix pz = p->at(z);
    const double tr = std::real(pz.trace());
    const auto rounded = static_cast<Eigen::Index>(std::llround(tr));
    if (rounded != prev.rank || std::abs(tr - static_cast<double>(rounded)) > opt.tol.resid) {
      std::ostringstream msg;
      msg << "lift_step (stage " << k_next << "): projector trace " << tr
          << " does not match rank " << prev.rank;
      throw RankMismatch(msg.str());
    }

    u_values.push_back(chain->eval(z));

    if (z[c].imag() == 0.0) {
      auto it = prev_index.find(point_key(z));
      if (it == prev_index.end()) {
        throw GridMismatch("lift_step: real-slice point missing from the previous stage grid");
      }
      seam = std::max(seam, (u_values.back() - prev.conjugator.values[it->second]).norm());
    }
  }
  if (seam > opt.tol.seam) {
    std::ostringstream msg;
    msg << "lift_step (stage " << k_next << "): seam residual " << seam
        << " exceeds tolerance " << opt.tol.seam;
    throw SeamDiscontinuity(msg.str());
  }

  GridMatrixFunction u(half_grid, std::move(u_values));
  GridMatrixFunction s = reflect_extend(u, full_grid);

  double residual = 0.0;
  for (std::size_t i = 0; i < full_grid->size(); ++i) {
    residual = std::max(residual, conjugation_residual(s.values[i], p->at(full_grid->points[i]),
                                                       projector, opt.tol));
  }

  StageState state;
  state.k = k_next;
  state.conjugator = std::move(s);
  state.rank = prev.rank;
  state.ledger = prev.ledger;
  state.ledger.push_back(StageReport{k_next, prev.rank, residual, seam});
  state.chain = std::move(chain);
  return state;
}

DiagonalizeResult diagonalize_real_symmetric(const ExprPtr& p, int n, const GridParams& grids,
                                             int steps, const TransportOptions& opt) {
  if (p == nullptr) {
    throw Error("diagonalize_real_symmetric: null expression");
  }
  if (n < 1) {
    throw Error("diagonalize_real_symmetric: need at least one variable");
  }
  const std::vector<double> intervals = funcrep::diameter_interval_points(grids.radial);

  const auto make_grid = [&](int k, bool half) {
    funcrep::DomainDescriptor d{n, k, half};
    return std::make_shared<const ConjClosedGrid>(
        funcrep::build_grid_points(d, grids.radial, grids.angular, intervals));
  };

  auto final_grid = make_grid(n, false);
  {
    const double sym = funcrep::real_symmetry_residual(p, *final_grid, opt.tol);
    if (sym > opt.tol.resid) {
      throw NotRealOnRealSlice("diagonalize: input is not real symmetric (residual " +
                               std::to_string(sym) + ")");
    }
    const double idem = funcrep::idempotency_residual(p, *final_grid, opt.tol);
    if (idem > opt.tol.resid) {
      throw NotIdempotent("diagonalize: input is not idempotent (residual " +
                          std::to_string(idem) + ")");
    }
  }

  auto field = std::make_shared<const kato::ExprField>(p, n, opt.tol);
  StageState state = diagonalize_base_real(field, make_grid(0, false), steps, opt);
  for (int k = 0; k < n; ++k) {
    auto full = (k + 1 == n) ? final_grid : make_grid(k + 1, false);
    state = lift_step(field, state, make_grid(k + 1, true), std::move(full), opt);
  }

  DiagonalizeResult result;
  result.rank = state.rank;
  result.report.stages = state.ledger;
  result.report.final_residual = state.ledger.back().residual;

  double sym = 0.0;
  const auto& s = state.conjugator;
  for (std::size_t i = 0; i < s.grid->size(); ++i) {
    const std::size_t j = s.grid->conj_index[i];
    sym = std::max(sym, (s.values[i] - s.values[j].conjugate()).norm());
  }
  result.report.symmetry_residual = sym;
  result.min_singular_value = funcrep::invertibility_margin(s);
  result.conjugator = std::move(state.conjugator);
  return result;
}

}  // namespace pdmf::diag1
