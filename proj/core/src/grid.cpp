#include "pdmf/grid.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <utility>

namespace pdmf::funcrep {

namespace {

constexpr double kPi = std::numbers::pi;

struct Factor {
  std::vector<Complex> points;
  std::vector<std::size_t> pair;  // index of the conjugate within the factor
};

Factor interval_factor(const std::vector<double>& xs) {
  Factor f;
  f.points.reserve(xs.size());
  for (double x : xs) {
    f.points.emplace_back(x, 0.0);
  }
  f.pair.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    f.pair[i] = i;
  }
  return f;
}

Factor disc_factor(int radial, int angular, bool half) {
  if (radial < 2) {
    throw Error("build_grid: radial count must be at least 2");
  }
  if (angular < 2 || angular % 2 != 0) {
    throw Error("build_grid: angular count must be even and at least 2");
  }
  const std::vector<double> radii = polar_radii(radial);
  const int half_angles = angular / 2;
  const int kept = half ? half_angles + 1 : angular;

  // Angles 0 and pi give exactly real points; angles above pi are constructed
  // as bit-exact conjugates of their mirror images.
  std::vector<Complex> units(static_cast<std::size_t>(kept));
  units[0] = Complex(1.0, 0.0);
  for (int j = 1; j < half_angles; ++j) {
    const double theta = 2.0 * kPi * j / angular;
    units[static_cast<std::size_t>(j)] = Complex(std::cos(theta), std::sin(theta));
  }
  if (angular % 4 == 0) {
    units[static_cast<std::size_t>(angular / 4)] = Complex(0.0, 1.0);
  }
  units[static_cast<std::size_t>(half_angles)] = Complex(-1.0, 0.0);
  if (!half) {
    for (int j = half_angles + 1; j < angular; ++j) {
      units[static_cast<std::size_t>(j)] = std::conj(units[static_cast<std::size_t>(angular - j)]);
    }
  }

  Factor f;
  f.points.reserve(static_cast<std::size_t>(radial) * static_cast<std::size_t>(kept));
  f.pair.reserve(f.points.capacity());
  for (int i = 0; i < radial; ++i) {
    for (int j = 0; j < kept; ++j) {
      const Complex u = units[static_cast<std::size_t>(j)];
      double re = radii[static_cast<std::size_t>(i)] * u.real();
      double im = radii[static_cast<std::size_t>(i)] * u.imag();
      // Normalize signed zeros so bit-level point identities hold across grids.
      if (re == 0.0) {
        re = 0.0;
      }
      if (im == 0.0) {
        im = 0.0;
      }
      f.points.emplace_back(re, im);
      std::size_t mate;
      if (j == 0 || j == half_angles) {
        mate = static_cast<std::size_t>(i * kept + j);
      } else if (half) {
        mate = kNoConjPair;
      } else {
        mate = static_cast<std::size_t>(i * kept + (angular - j));
      }
      f.pair.push_back(mate);
    }
  }
  return f;
}

}  // namespace

bool ConjClosedGrid::fully_paired() const {
  for (std::size_t p : conj_index) {
    if (p == kNoConjPair) {
      return false;
    }
  }
  return true;
}

void ConjClosedGrid::check_invariants() const {
  if (points.size() != conj_index.size()) {
    throw GridMismatch("grid: pairing size mismatch");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t j = conj_index[i];
    if (j == kNoConjPair) {
      if (!domain.half) {
        throw GridMismatch("grid: unpaired point in a full grid");
      }
      continue;
    }
    if (j >= points.size() || conj_index[j] != i) {
      throw GridMismatch("grid: pairing is not involutive");
    }
    const Point& z = points[i];
    const Point& w = points[j];
    for (std::size_t c = 0; c < z.size(); ++c) {
      if (!(w[c].real() == z[c].real() && w[c].imag() == -z[c].imag())) {
        throw GridMismatch("grid: paired points are not exact conjugates");
      }
    }
  }
}

std::vector<double> uniform_interval_points(int count) {
  if (count < 1) {
    throw Error("build_grid: interval count must be positive");
  }
  if (count == 1) {
    return {0.0};
  }
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    xs[static_cast<std::size_t>(t)] = -1.0 + 2.0 * (static_cast<double>(t) / (count - 1));
  }
  return xs;
}

std::vector<double> polar_radii(int radial) {
  if (radial < 2) {
    throw Error("polar_radii: radial count must be at least 2");
  }
  std::vector<double> rs(static_cast<std::size_t>(radial));
  for (int i = 0; i < radial; ++i) {
    rs[static_cast<std::size_t>(i)] = static_cast<double>(i) / (radial - 1);
  }
  return rs;
}

std::vector<double> diameter_interval_points(int radial) {
  const std::vector<double> rs = polar_radii(radial);
  std::vector<double> xs;
  xs.reserve(2 * rs.size() - 1);
  for (auto it = rs.rbegin(); it != rs.rend(); ++it) {
    xs.push_back(-*it);
  }
  for (std::size_t i = 1; i < rs.size(); ++i) {
    xs.push_back(rs[i]);
  }
  xs[rs.size() - 1] = 0.0;  // -0.0 -> +0.0
  return xs;
}

ConjClosedGrid build_grid(const DomainDescriptor& domain, int radial, int angular, int interval) {
  return build_grid_points(domain, radial, angular, uniform_interval_points(interval));
}

ConjClosedGrid build_grid_points(const DomainDescriptor& domain, int radial, int angular,
                                 const std::vector<double>& interval_points) {
  if (domain.n < 1 || domain.k < 0 || domain.k > domain.n) {
    throw Error("build_grid: invalid domain descriptor");
  }
  std::vector<Factor> factors;
  factors.reserve(static_cast<std::size_t>(domain.n));
  for (int c = 0; c < domain.n; ++c) {
    if (c < domain.first_disc()) {
      factors.push_back(interval_factor(interval_points));
    } else {
      factors.push_back(disc_factor(radial, angular, domain.half && c == domain.first_disc()));
    }
  }

  std::size_t total = 1;
  for (const Factor& f : factors) {
    total *= f.points.size();
  }

  ConjClosedGrid grid;
  grid.domain = domain;
  grid.points.reserve(total);
  grid.conj_index.reserve(total);

  // Odometer over the tensor product, first coordinate slowest.
  std::vector<std::size_t> idx(static_cast<std::size_t>(domain.n), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point z(static_cast<std::size_t>(domain.n));
    std::size_t mate = 0;
    bool paired = true;
    for (int c = 0; c < domain.n; ++c) {
      const Factor& f = factors[static_cast<std::size_t>(c)];
      const std::size_t i = idx[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(c)] = f.points[i];
      const std::size_t m = f.pair[i];
      if (m == kNoConjPair) {
        paired = false;
      } else {
        mate = mate * f.points.size() + m;
      }
    }
    grid.points.push_back(std::move(z));
    grid.conj_index.push_back(paired ? mate : kNoConjPair);

    for (int c = domain.n - 1; c >= 0; --c) {
      auto& i = idx[static_cast<std::size_t>(c)];
      if (++i < factors[static_cast<std::size_t>(c)].points.size()) {
        break;
      }
      i = 0;
    }
  }
  return grid;
}

GridMatrixFunction::GridMatrixFunction(std::shared_ptr<const ConjClosedGrid> g,
                                       std::vector<CMatrix> vals)
    : grid(std::move(g)), values(std::move(vals)) {
  if (grid == nullptr) {
    throw Error("GridMatrixFunction: null grid");
  }
  if (values.size() != grid->points.size()) {
    throw GridMismatch("GridMatrixFunction: value count does not match grid size");
  }
  for (const CMatrix& v : values) {
    if (v.rows() != values.front().rows() || v.cols() != values.front().cols()) {
      throw GridMismatch("GridMatrixFunction: inconsistent matrix shapes");
    }
  }
}

std::vector<CMatrix> evaluate_on_grid(const ExprPtr& f, const ConjClosedGrid& grid,
                                      const Tolerances& tol) {
  std::vector<CMatrix> vals;
  vals.reserve(grid.size());
  for (const Point& z : grid.points) {
    vals.push_back(evaluate(f, z, tol));
  }
  return vals;
}

double real_symmetry_residual(const ExprPtr& f, const ConjClosedGrid& grid,
                              const Tolerances& tol) {
  if (!grid.fully_paired()) {
    throw GridMismatch("real_symmetry_residual: grid is not conjugation-closed");
  }
  const std::vector<CMatrix> vals = evaluate_on_grid(f, grid, tol);
  double worst = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const CMatrix diff = vals[i] - vals[grid.conj_index[i]].conjugate();
    worst = std::max(worst, diff.norm());
  }
  return worst;
}

double idempotency_residual(const ExprPtr& p, const ConjClosedGrid& grid, const Tolerances& tol) {
  double worst = 0.0;
  for (const Point& z : grid.points) {
    const CMatrix v = evaluate(p, z, tol);
    worst = std::max(worst, (v * v - v).norm());
  }
  return worst;
}

double invertibility_margin(const ExprPtr& f, const ConjClosedGrid& grid, const Tolerances& tol) {
  double margin = std::numeric_limits<double>::infinity();
  for (const Point& z : grid.points) {
    const CMatrix v = evaluate(f, z, tol);
    Eigen::JacobiSVD<CMatrix> svd(v);
    margin = std::min(margin, svd.singularValues().minCoeff());
  }
  return margin;
}

double invertibility_margin(const GridMatrixFunction& f) {
  double margin = std::numeric_limits<double>::infinity();
  for (const CMatrix& v : f.values) {
    Eigen::JacobiSVD<CMatrix> svd(v);
    margin = std::min(margin, svd.singularValues().minCoeff());
  }
  return margin;
}

std::string point_key(const Point& z) {
  std::string key(z.size() * 2 * sizeof(double), '\0');
  char* out = key.data();
  for (const Complex& c : z) {
    double re = c.real();
    double im = c.imag();
    if (re == 0.0) {
      re = 0.0;
    }
    if (im == 0.0) {
      im = 0.0;
    }
    std::memcpy(out, &re, sizeof(double));
    out += sizeof(double);
    std::memcpy(out, &im, sizeof(double));
    out += sizeof(double);
  }
  return key;
}

std::vector<std::vector<int>> multi_indices(int nvars, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(static_cast<std::size_t>(nvars), 0);
  const auto enumerate = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == nvars) {
      out.push_back(alpha);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      alpha[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, remaining - e);
    }
    alpha[static_cast<std::size_t>(pos)] = 0;
  };
  enumerate(enumerate, 0, max_degree);
  std::sort(out.begin(), out.end(), graded_lex_less);
  return out;
}

double dn_norm(const Poly& f, int N, const ConjClosedGrid& grid) {
  if (N < 0) {
    throw Error("dn_norm: order must be nonnegative");
  }
  const std::vector<std::vector<int>> alphas = multi_indices(f.nvars(), N);

  double total = 0.0;
  for (const std::vector<int>& a : alphas) {
    const Poly g = f.derivative(a);
    double sup = 0.0;
    for (const Point& z : grid.points) {
      sup = std::max(sup, g.eval(z).cwiseAbs().maxCoeff());
    }
    double weight = 1.0;
    for (int e : a) {
      for (int j = 2; j <= e; ++j) {
        weight *= static_cast<double>(j);
      }
    }
    total += sup / weight;
  }
  return total;
}

}  // namespace pdmf::funcrep
