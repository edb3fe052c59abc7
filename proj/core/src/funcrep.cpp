#include "pdmf/funcrep.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace pdmf::funcrep {

namespace {

std::string format_point(const Point& z) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i > 0) {
      out << ", ";
    }
    out << z[i].real() << (z[i].imag() < 0 ? "" : "+") << z[i].imag() << "i";
  }
  out << ")";
  return out.str();
}

template <int N>
CMatrix fixed_inverse(const CMatrix& a) {
  Eigen::Map<const Eigen::Matrix<Complex, N, N>> m(a.data());
  CMatrix out(N, N);
  Eigen::Map<Eigen::Matrix<Complex, N, N>>(out.data()) = m.inverse();
  return out;
}

// Inverse on the evaluation hot path: closed-form inverse for small sizes,
// accepted when the multiply-back residual is tight, LU with a pivot floor
// otherwise.
CMatrix guarded_inverse(const CMatrix& a, const Point& z, const Tolerances& tol) {
  const Eigen::Index m = a.rows();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  if (m <= 4) {
    CMatrix inv;
    switch (m) {
      case 1:
        inv = fixed_inverse<1>(a);
        break;
      case 2:
        inv = fixed_inverse<2>(a);
        break;
      case 3:
        inv = fixed_inverse<3>(a);
        break;
      default:
        inv = fixed_inverse<4>(a);
        break;
    }
    if (inv.allFinite() &&
        (a * inv - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-8 * scale) {
      return inv;
    }
  }
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= tol.singular_floor * scale) {
    throw SingularAtPoint("inverse node singular at point " + format_point(z));
  }
  return lu.inverse();
}

}  // namespace

Point conjugate(const Point& z) {
  Point out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::conj(z[i]);
  }
  return out;
}

Point scaled(const Point& z, double t) {
  Point out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = t * z[i];
  }
  return out;
}

Point origin(int nvars) { return Point(static_cast<std::size_t>(nvars), Complex(0.0, 0.0)); }

bool graded_lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  const int da = std::accumulate(a.begin(), a.end(), 0);
  const int db = std::accumulate(b.begin(), b.end(), 0);
  if (da != db) {
    return da < db;
  }
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Poly::Poly(int nvars, Eigen::Index rows, Eigen::Index cols)
    : nvars_(nvars), rows_(rows), cols_(cols) {
  if (nvars < 0 || rows <= 0 || cols <= 0) {
    throw Error("Poly: invalid shape");
  }
}

Poly Poly::constant(int nvars, CMatrix value) {
  Poly p(nvars, value.rows(), value.cols());
  p.add_term(std::vector<int>(static_cast<std::size_t>(nvars), 0), std::move(value));
  return p;
}

void Poly::add_term(std::vector<int> alpha, CMatrix coeff) {
  if (static_cast<int>(alpha.size()) != nvars_) {
    throw Error("Poly::add_term: multi-index arity mismatch");
  }
  for (int e : alpha) {
    if (e < 0) {
      throw Error("Poly::add_term: negative exponent");
    }
  }
  if (coeff.rows() != rows_ || coeff.cols() != cols_) {
    throw Error("Poly::add_term: coefficient shape mismatch");
  }
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), alpha,
      [](const PolyTerm& t, const std::vector<int>& a) { return graded_lex_less(t.alpha, a); });
  if (it != terms_.end() && it->alpha == alpha) {
    it->coeff += coeff;
    if (it->coeff.isZero(0.0)) {
      terms_.erase(it);
    }
    return;
  }
  if (coeff.isZero(0.0)) {
    return;
  }
  terms_.insert(it, PolyTerm{std::move(alpha), std::move(coeff)});
}

int Poly::degree() const {
  int d = 0;
  for (const PolyTerm& t : terms_) {
    d = std::max(d, std::accumulate(t.alpha.begin(), t.alpha.end(), 0));
  }
  return d;
}

CMatrix Poly::eval(const Point& z) const {
  if (static_cast<int>(z.size()) != nvars_) {
    throw Error("Poly::eval: point arity mismatch");
  }
  CMatrix acc = CMatrix::Zero(rows_, cols_);
  Complex* out = acc.data();
  const Eigen::Index size = rows_ * cols_;
  for (const PolyTerm& t : terms_) {
    Complex monomial(1.0, 0.0);
    for (int v = 0; v < nvars_; ++v) {
      const Complex zv = z[static_cast<std::size_t>(v)];
      for (int e = 0; e < t.alpha[static_cast<std::size_t>(v)]; ++e) {
        monomial *= zv;
      }
    }
    const Complex* coeff = t.coeff.data();
    for (Eigen::Index i = 0; i < size; ++i) {
      out[i] += monomial * coeff[i];
    }
  }
  return acc;
}

Poly Poly::derivative(const std::vector<int>& alpha) const {
  if (static_cast<int>(alpha.size()) != nvars_) {
    throw Error("Poly::derivative: multi-index arity mismatch");
  }
  Poly out(nvars_, rows_, cols_);
  for (const PolyTerm& t : terms_) {
    double factor = 1.0;
    std::vector<int> shifted(t.alpha);
    bool vanishes = false;
    for (int v = 0; v < nvars_; ++v) {
      const int e = t.alpha[static_cast<std::size_t>(v)];
      const int d = alpha[static_cast<std::size_t>(v)];
      if (e < d) {
        vanishes = true;
        break;
      }
      for (int j = 0; j < d; ++j) {
        factor *= static_cast<double>(e - j);
      }
      shifted[static_cast<std::size_t>(v)] = e - d;
    }
    if (!vanishes) {
      out.add_term(std::move(shifted), factor * t.coeff);
    }
  }
  return out;
}

Poly Poly::conjugate_coeffs() const {
  Poly out(nvars_, rows_, cols_);
  for (const PolyTerm& t : terms_) {
    out.add_term(t.alpha, t.coeff.conjugate());
  }
  return out;
}

namespace {

// Shared arity/shape reconciliation for interior nodes.
void merge_child_shape(const ExprPtr& child, int& nvars, Eigen::Index& rows, Eigen::Index& cols,
                       bool product_chain) {
  if (child == nullptr) {
    throw Error("Expr: null child");
  }
  if (child->nvars() >= 0) {
    if (nvars >= 0 && nvars != child->nvars()) {
      throw Error("Expr: children disagree on variable count");
    }
    nvars = std::max(nvars, child->nvars());
  }
  if (rows == 0) {
    rows = child->rows();
    cols = child->cols();
    return;
  }
  if (product_chain) {
    if (cols != child->rows()) {
      throw Error("Expr: product dimension mismatch");
    }
    cols = child->cols();
  } else if (rows != child->rows() || cols != child->cols()) {
    throw Error("Expr: children disagree on matrix shape");
  }
}

}  // namespace

ExprPtr Expr::make_poly(Poly p) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Poly;
  e->nvars_ = p.nvars();
  e->rows_ = p.rows();
  e->cols_ = p.cols();
  e->poly_ = std::make_shared<const Poly>(std::move(p));
  return e;
}

ExprPtr Expr::make_const(CMatrix value) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Const;
  e->nvars_ = -1;
  e->rows_ = value.rows();
  e->cols_ = value.cols();
  e->value_ = std::move(value);
  return e;
}

ExprPtr Expr::make_sum(std::vector<ExprPtr> children) {
  if (children.empty()) {
    throw Error("Expr: sum needs at least one child");
  }
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Sum;
  for (const ExprPtr& c : children) {
    merge_child_shape(c, e->nvars_, e->rows_, e->cols_, /*product_chain=*/false);
  }
  e->children_ = std::move(children);
  return e;
}

ExprPtr Expr::make_product(std::vector<ExprPtr> children) {
  if (children.empty()) {
    throw Error("Expr: product needs at least one child");
  }
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Product;
  for (const ExprPtr& c : children) {
    merge_child_shape(c, e->nvars_, e->rows_, e->cols_, /*product_chain=*/true);
  }
  e->children_ = std::move(children);
  return e;
}

ExprPtr Expr::make_inverse(ExprPtr child) {
  if (child == nullptr) {
    throw Error("Expr: null child");
  }
  if (child->rows() != child->cols()) {
    throw Error("Expr: inverse of a non-square function");
  }
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Inverse;
  e->nvars_ = child->nvars();
  e->rows_ = child->rows();
  e->cols_ = child->cols();
  e->children_ = {std::move(child)};
  return e;
}

ExprPtr Expr::make_star(ExprPtr child) {
  if (child == nullptr) {
    throw Error("Expr: null child");
  }
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::Star;
  e->nvars_ = child->nvars();
  e->rows_ = child->rows();
  e->cols_ = child->cols();
  e->children_ = {std::move(child)};
  return e;
}

ExprPtr Expr::make_scale_arg(ExprPtr child, double t) {
  if (child == nullptr) {
    throw Error("Expr: null child");
  }
  if (!std::isfinite(t)) {
    throw Error("Expr: scale factor must be finite");
  }
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::ScaleArg;
  e->nvars_ = child->nvars();
  e->rows_ = child->rows();
  e->cols_ = child->cols();
  e->scale_ = t;
  e->children_ = {std::move(child)};
  return e;
}

const Poly& Expr::poly() const {
  if (kind_ != ExprKind::Poly) {
    throw Error("Expr::poly: not a polynomial leaf");
  }
  return *poly_;
}

const CMatrix& Expr::value() const {
  if (kind_ != ExprKind::Const) {
    throw Error("Expr::value: not a constant leaf");
  }
  return value_;
}

CMatrix Expr::evaluate(const Point& z, const Tolerances& tol) const {
  if (nvars_ >= 0 && static_cast<int>(z.size()) != nvars_) {
    throw Error("Expr::evaluate: point arity mismatch");
  }
  switch (kind_) {
    case ExprKind::Poly:
      return poly_->eval(z);
    case ExprKind::Const:
      return value_;
    case ExprKind::Sum: {
      CMatrix acc = children_[0]->evaluate(z, tol);
      for (std::size_t i = 1; i < children_.size(); ++i) {
        acc += children_[i]->evaluate(z, tol);
      }
      return acc;
    }
    case ExprKind::Product: {
      CMatrix acc = children_[0]->evaluate(z, tol);
      for (std::size_t i = 1; i < children_.size(); ++i) {
        acc = acc * children_[i]->evaluate(z, tol);
      }
      return acc;
    }
    case ExprKind::Inverse:
      return guarded_inverse(children_[0]->evaluate(z, tol), z, tol);
    case ExprKind::Star:
      return children_[0]->evaluate(funcrep::conjugate(z), tol).conjugate();
    case ExprKind::ScaleArg:
      return children_[0]->evaluate(scaled(z, scale_), tol);
  }
  throw Error("Expr::evaluate: corrupt node kind");
}

CMatrix evaluate(const ExprPtr& f, const Point& z, const Tolerances& tol) {
  if (f == nullptr) {
    throw Error("evaluate: null expression");
  }
  return f->evaluate(z, tol);
}

ExprPtr star_involution(const ExprPtr& f) {
  if (f == nullptr) {
    throw Error("star_involution: null expression");
  }
  switch (f->kind()) {
    case ExprKind::Poly:
      return Expr::make_poly(f->poly().conjugate_coeffs());
    case ExprKind::Const:
      return Expr::make_const(f->value().conjugate());
    case ExprKind::Star:
      return f->children()[0];  // f** = f
    default:
      return Expr::make_star(f);
  }
}

Poly poly_derivative(const Poly& f, const std::vector<int>& alpha) {
  return f.derivative(alpha);
}

}  // namespace pdmf::funcrep
