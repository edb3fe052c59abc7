#include "pdmf/instances.hpp"

#include <cmath>
#include <utility>

#include "pdmf/grid.hpp"

namespace pdmf::instances {

namespace {

using funcrep::CMatrix;
using funcrep::Complex;
using funcrep::Expr;
using funcrep::Poly;

// Random matrix polynomial with coefficients in [-1,1] (plus i*[-1,1] when
// complex), drawn in the canonical order and rescaled so that
// epsilon * sum_of_coefficient_norms <= bound.
Poly random_poly(int n, int m, int degree, double epsilon, double bound, bool complex_coeffs,
                 Rng& rng) {
  const auto alphas = funcrep::multi_indices(n, degree);
  std::vector<CMatrix> coeffs;
  coeffs.reserve(alphas.size());
  double norm_sum = 0.0;
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    CMatrix c(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double re = rng.uniform_pm1();
        const double im = complex_coeffs ? rng.uniform_pm1() : 0.0;
        c(i, j) = Complex(re, im);
      }
    }
    norm_sum += c.norm();
    coeffs.push_back(std::move(c));
  }

  double scale = 1.0;
  if (epsilon > 0.0 && epsilon * norm_sum > bound) {
    scale = bound / (epsilon * norm_sum);
  }

  Poly p(n, m, m);
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    p.add_term(alphas[t], scale * coeffs[t]);
  }
  return p;
}

// I + epsilon * M as a polynomial.
Poly shifted_identity(const Poly& m_poly, double epsilon) {
  Poly t(m_poly.nvars(), m_poly.rows(), m_poly.cols());
  t.add_term(std::vector<int>(static_cast<std::size_t>(m_poly.nvars()), 0),
             CMatrix::Identity(m_poly.rows(), m_poly.cols()));
  for (const auto& term : m_poly.terms()) {
    t.add_term(term.alpha, epsilon * term.coeff);
  }
  return t;
}

}  // namespace

ExprPtr gen_idempotent_instance(int n, int m, int rank, int degree, double epsilon,
                                std::uint64_t seed) {
  if (n < 1 || m < 1 || rank < 0 || rank > m || degree < 0 || epsilon < 0.0) {
    throw Error("gen_idempotent_instance: invalid parameters");
  }
  Rng rng(seed);
  const Poly m_poly = random_poly(n, m, degree, epsilon, 0.9, /*complex_coeffs=*/false, rng);
  const Poly t = shifted_identity(m_poly, epsilon);

  return Expr::make_product({Expr::make_poly(t),
                             Expr::make_const(numc::rank_projector(m, rank)),
                             Expr::make_inverse(Expr::make_poly(t))});
}

UnitaryInstance gen_symmetric_unitary_instance(int n, int m, int degree, double epsilon,
                                               std::uint64_t seed) {
  if (n < 1 || m < 1 || degree < 0 || epsilon < 0.0) {
    throw Error("gen_symmetric_unitary_instance: invalid parameters");
  }
  Rng rng(seed);
  const Poly n_poly = random_poly(n, m, degree, epsilon, 0.5, /*complex_coeffs=*/true, rng);
  const Poly v = shifted_identity(n_poly, epsilon);

  ExprPtr v_expr = Expr::make_poly(v);
  ExprPtr u = Expr::make_product(
      {v_expr, Expr::make_inverse(funcrep::star_involution(v_expr))});
  return UnitaryInstance{std::move(u), std::move(v_expr)};
}

}  // namespace pdmf::instances
