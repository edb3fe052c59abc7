#pragma once

#include <memory>
#include <vector>

#include "pdmf/config.hpp"
#include "pdmf/errors.hpp"
#include "pdmf/numc.hpp"

namespace pdmf::funcrep {

using numc::CMatrix;
using numc::Complex;

/// A point of the domain chain; coordinate count equals the variable count.
using Point = std::vector<Complex>;

Point conjugate(const Point& z);
Point scaled(const Point& z, double t);
Point origin(int nvars);

/// Graded lexicographic order on exponent multi-indices: total degree first,
/// then componentwise comparison. This is the canonical term order used for
/// serialization and for coefficient draws in instance generators.
bool graded_lex_less(const std::vector<int>& a, const std::vector<int>& b);

struct PolyTerm {
  std::vector<int> alpha;  // exponent multi-index, size = nvars
  CMatrix coeff;
};

/// Multivariate polynomial with matrix coefficients, kept in canonical
/// graded-lex term order with merged duplicates and no zero terms.
class Poly {
 public:
  Poly(int nvars, Eigen::Index rows, Eigen::Index cols);
  static Poly constant(int nvars, CMatrix value);

  void add_term(std::vector<int> alpha, CMatrix coeff);

  int nvars() const { return nvars_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }
  int degree() const;

  CMatrix eval(const Point& z) const;
  /// Exact formal partial derivative d^alpha.
  Poly derivative(const std::vector<int>& alpha) const;
  /// Entrywise conjugation of every coefficient (the star involution on polynomials).
  Poly conjugate_coeffs() const;

 private:
  int nvars_;
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<PolyTerm> terms_;
};

enum class ExprKind { Poly, Const, Sum, Product, Inverse, Star, ScaleArg };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression tree over matrix-valued functions on the polydisc chain.
/// Leaves are polynomials and constants; interior nodes are pointwise sum,
/// product, inverse, the star involution f*(z) = conj(f(conj(z))), and the
/// argument scaling f(t*z).
class Expr {
 public:
  static ExprPtr make_poly(Poly p);
  static ExprPtr make_const(CMatrix value);
  static ExprPtr make_sum(std::vector<ExprPtr> children);
  static ExprPtr make_product(std::vector<ExprPtr> children);
  static ExprPtr make_inverse(ExprPtr child);
  static ExprPtr make_star(ExprPtr child);
  static ExprPtr make_scale_arg(ExprPtr child, double t);

  ExprKind kind() const { return kind_; }
  /// Variable count; constants report -1 (usable with any arity).
  int nvars() const { return nvars_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const Poly& poly() const;
  const CMatrix& value() const;
  const std::vector<ExprPtr>& children() const { return children_; }
  double scale() const { return scale_; }

  CMatrix evaluate(const Point& z, const Tolerances& tol = {}) const;

 private:
  Expr() = default;

  ExprKind kind_ = ExprKind::Const;
  int nvars_ = -1;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::shared_ptr<const Poly> poly_;
  CMatrix value_;
  std::vector<ExprPtr> children_;
  double scale_ = 1.0;
};

/// Exact recursive evaluation; throws SingularAtPoint when an Inverse node is
/// singular at z.
CMatrix evaluate(const ExprPtr& f, const Point& z, const Tolerances& tol = {});

/// The involution f -> f*. Polynomials get their coefficients conjugated in
/// place; any other node is wrapped so that evaluate(star(f), z) equals
/// conj(evaluate(f, conj(z))).
ExprPtr star_involution(const ExprPtr& f);

/// Spec'd operation form of Poly::derivative.
Poly poly_derivative(const Poly& f, const std::vector<int>& alpha);

}  // namespace pdmf::funcrep
