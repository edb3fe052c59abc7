#pragma once

#include <json.hpp>
#include <string>

#include "pdmf/diag1.hpp"
#include "pdmf/factor2.hpp"

namespace pdmf::json_io {

using json = nlohmann::json;

// Complex numbers serialize as [re, im]; matrices as row-major nested arrays
// of such pairs.
json complex_to_json(const Complex& c);
Complex complex_from_json(const json& j);

json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j);

// Expression schema:
//   {"kind":"poly","dims":[m,p],"nvars":n,
//    "terms":[{"alpha":[a1..an],"coeff":[[[re,im],...],...]}]}
//   {"kind":"sum"|"product"|"inverse"|"star","children":[...]}
//   {"kind":"scale_arg","t":t,"children":[...]}
//   {"kind":"const","dims":[m,p],"value":[[[re,im],...],...]}
json expr_to_json(const funcrep::ExprPtr& f);
funcrep::ExprPtr expr_from_json(const json& j);

// Grid schema: {"domain":{"n":..,"k":..,"half":..},"points":[[[re,im],..],..]}.
// The conjugation pairing is reconstructed on load by exact matching.
json grid_to_json(const funcrep::ConjClosedGrid& grid);
funcrep::ConjClosedGrid grid_from_json(const json& j);

json report_to_json(const diag1::VerificationReport& report);
diag1::VerificationReport diag_report_from_json(const json& j);

json report_to_json(const factor2::FactorizationReport& report);
factor2::FactorizationReport factor_report_from_json(const json& j);

json values_to_json(const std::vector<CMatrix>& values);
std::vector<CMatrix> values_from_json(const json& j);

std::string dump(const json& j);

}  // namespace pdmf::json_io
