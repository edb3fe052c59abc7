#include "pdmf/json_io.hpp"

#include <unordered_map>
#include <utility>

namespace pdmf::json_io {

namespace {

using funcrep::ConjClosedGrid;
using funcrep::Expr;
using funcrep::ExprKind;
using funcrep::ExprPtr;
using funcrep::Point;
using funcrep::Poly;

json point_to_json(const Point& z) {
  json out = json::array();
  for (const Complex& c : z) {
    out.push_back(complex_to_json(c));
  }
  return out;
}

Point point_from_json(const json& j) {
  Point z;
  z.reserve(j.size());
  for (const json& c : j) {
    z.push_back(complex_from_json(c));
  }
  return z;
}

}  // namespace

json complex_to_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error("json: complex number must be a two-element array");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(complex_to_json(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw Error("json: matrix must be a nested array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw Error("json: ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = complex_from_json(j[r][c]);
    }
  }
  return m;
}

json expr_to_json(const ExprPtr& f) {
  if (f == nullptr) {
    throw Error("json: null expression");
  }
  json out;
  switch (f->kind()) {
    case ExprKind::Poly: {
      const Poly& p = f->poly();
      out["kind"] = "poly";
      out["dims"] = json::array({p.rows(), p.cols()});
      out["nvars"] = p.nvars();
      json terms = json::array();
      for (const auto& t : p.terms()) {
        terms.push_back(json{{"alpha", t.alpha}, {"coeff", matrix_to_json(t.coeff)}});
      }
      out["terms"] = std::move(terms);
      return out;
    }
    case ExprKind::Const:
      out["kind"] = "const";
      out["dims"] = json::array({f->rows(), f->cols()});
      out["value"] = matrix_to_json(f->value());
      return out;
    case ExprKind::Sum:
      out["kind"] = "sum";
      break;
    case ExprKind::Product:
      out["kind"] = "product";
      break;
    case ExprKind::Inverse:
      out["kind"] = "inverse";
      break;
    case ExprKind::Star:
      out["kind"] = "star";
      break;
    case ExprKind::ScaleArg:
      out["kind"] = "scale_arg";
      out["t"] = f->scale();
      break;
  }
  json children = json::array();
  for (const ExprPtr& c : f->children()) {
    children.push_back(expr_to_json(c));
  }
  out["children"] = std::move(children);
  return out;
}

ExprPtr expr_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "poly") {
    const auto dims = j.at("dims");
    Poly p(j.at("nvars").get<int>(), dims[0].get<Eigen::Index>(), dims[1].get<Eigen::Index>());
    for (const json& t : j.at("terms")) {
      p.add_term(t.at("alpha").get<std::vector<int>>(), matrix_from_json(t.at("coeff")));
    }
    return Expr::make_poly(std::move(p));
  }
  if (kind == "const") {
    return Expr::make_const(matrix_from_json(j.at("value")));
  }

  std::vector<ExprPtr> children;
  for (const json& c : j.at("children")) {
    children.push_back(expr_from_json(c));
  }
  if (kind == "sum") {
    return Expr::make_sum(std::move(children));
  }
  if (kind == "product") {
    return Expr::make_product(std::move(children));
  }
  if (kind == "inverse") {
    if (children.size() != 1) {
      throw Error("json: inverse takes exactly one child");
    }
    return Expr::make_inverse(std::move(children[0]));
  }
  if (kind == "star") {
    if (children.size() != 1) {
      throw Error("json: star takes exactly one child");
    }
    return Expr::make_star(std::move(children[0]));
  }
  if (kind == "scale_arg") {
    if (children.size() != 1) {
      throw Error("json: scale_arg takes exactly one child");
    }
    return Expr::make_scale_arg(std::move(children[0]), j.at("t").get<double>());
  }
  throw Error("json: unknown expression kind '" + kind + "'");
}

json grid_to_json(const ConjClosedGrid& grid) {
  json out;
  out["domain"] = json{{"n", grid.domain.n}, {"k", grid.domain.k}, {"half", grid.domain.half}};
  json pts = json::array();
  for (const Point& z : grid.points) {
    pts.push_back(point_to_json(z));
  }
  out["points"] = std::move(pts);
  return out;
}

ConjClosedGrid grid_from_json(const json& j) {
  ConjClosedGrid grid;
  const json& d = j.at("domain");
  grid.domain.n = d.at("n").get<int>();
  grid.domain.k = d.at("k").get<int>();
  grid.domain.half = d.at("half").get<bool>();
  for (const json& p : j.at("points")) {
    grid.points.push_back(point_from_json(p));
  }

  // Rebuild the pairing by exact coordinate matching. Duplicate points (the
  // polar origin appears once per angle) are paired positionally so the
  // result stays involutive.
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    groups[funcrep::point_key(grid.points[i])].push_back(i);
  }
  std::unordered_map<std::string, std::size_t> position;
  position.reserve(grid.points.size());
  grid.conj_index.resize(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const std::string own = funcrep::point_key(grid.points[i]);
    const std::size_t slot = position[own]++;
    const auto it = groups.find(funcrep::point_key(funcrep::conjugate(grid.points[i])));
    if (it == groups.end() || slot >= it->second.size()) {
      if (!grid.domain.half) {
        throw GridMismatch("json: grid is not conjugation-closed");
      }
      grid.conj_index[i] = funcrep::kNoConjPair;
    } else {
      grid.conj_index[i] = it->second[slot];
    }
  }
  grid.check_invariants();
  return grid;
}

json report_to_json(const diag1::VerificationReport& report) {
  json stages = json::array();
  for (const auto& s : report.stages) {
    stages.push_back(json{
        {"k", s.k}, {"rank", s.rank}, {"residual", s.residual}, {"seam", s.seam}});
  }
  return json{{"stages", std::move(stages)},
              {"final_residual", report.final_residual},
              {"symmetry_residual", report.symmetry_residual}};
}

diag1::VerificationReport diag_report_from_json(const json& j) {
  diag1::VerificationReport report;
  for (const json& s : j.at("stages")) {
    report.stages.push_back(diag1::StageReport{s.at("k").get<int>(),
                                               s.at("rank").get<Eigen::Index>(),
                                               s.at("residual").get<double>(),
                                               s.at("seam").get<double>()});
  }
  report.final_residual = j.at("final_residual").get<double>();
  report.symmetry_residual = j.at("symmetry_residual").get<double>();
  return report;
}

json report_to_json(const factor2::FactorizationReport& report) {
  return json{{"reconstruction_residual", report.reconstruction_residual},
              {"star_residual", report.star_residual},
              {"min_singular_value", report.min_singular_value},
              {"holomorphy_diag", report.holomorphy_diag}};
}

factor2::FactorizationReport factor_report_from_json(const json& j) {
  factor2::FactorizationReport report;
  report.reconstruction_residual = j.at("reconstruction_residual").get<double>();
  report.star_residual = j.at("star_residual").get<double>();
  report.min_singular_value = j.at("min_singular_value").get<double>();
  report.holomorphy_diag = j.at("holomorphy_diag").get<double>();
  return report;
}

json values_to_json(const std::vector<CMatrix>& values) {
  json out = json::array();
  for (const CMatrix& v : values) {
    out.push_back(matrix_to_json(v));
  }
  return out;
}

std::vector<CMatrix> values_from_json(const json& j) {
  std::vector<CMatrix> out;
  out.reserve(j.size());
  for (const json& v : j) {
    out.push_back(matrix_from_json(v));
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace pdmf::json_io
