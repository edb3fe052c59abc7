// pdmf: diagonalize real-symmetric idempotent matrix functions over the
// polydisc and compute symmetric factorizations of star-unitary functions,
// with JSON instances, results, and verification reports.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "pdmf/diag1.hpp"
#include "pdmf/factor2.hpp"
#include "pdmf/instances.hpp"
#include "pdmf/json_io.hpp"

namespace {

using pdmf::json_io::json;

constexpr int kExitOk = 0;
constexpr int kExitTolerance = 2;
constexpr int kExitStructural = 3;

struct RunConfig {
  std::string input;
  std::string output;
  std::string vtrue_output;
  int n = 1;
  int m = 2;
  int rank = 1;
  int degree = 1;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  int radial = 9;
  int angular = 16;
  int interval = 17;
  int ode_steps = 200;
  int transport_steps = 200;
  int norm_order = 1;
  double tol_resid = 1e-6;
  double tol_exact = 1e-10;
};

pdmf::Tolerances tolerances(const RunConfig& cfg) {
  pdmf::Tolerances tol;
  tol.resid = cfg.tol_resid;
  tol.exact = cfg.tol_exact;
  return tol;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw pdmf::Error("cannot open input file: " + path);
  }
  json j;
  in >> j;
  return j;
}

// Atomic write: temp file in the same directory, then rename.
void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      throw pdmf::Error("cannot open output file: " + tmp.string());
    }
    out << text;
  }
  std::filesystem::rename(tmp, target);
}

void write_json(const std::string& path, const json& j) {
  write_file(path, pdmf::json_io::dump(j));
}

int require_nvars(const pdmf::funcrep::ExprPtr& expr) {
  if (expr->nvars() < 1) {
    throw pdmf::Error("input expression does not determine a variable count");
  }
  return expr->nvars();
}

json diag_config_json(const RunConfig& cfg) {
  return json{{"command", "diagonalize"},
              {"radial", cfg.radial},
              {"angular", cfg.angular},
              {"transport_steps", cfg.transport_steps},
              {"tol_resid", cfg.tol_resid},
              {"tol_exact", cfg.tol_exact}};
}

json factor_config_json(const RunConfig& cfg) {
  return json{{"command", "factorize"},
              {"radial", cfg.radial},
              {"angular", cfg.angular},
              {"ode_steps", cfg.ode_steps},
              {"tol_resid", cfg.tol_resid},
              {"tol_exact", cfg.tol_exact}};
}

int run_gen_idempotent(const RunConfig& cfg) {
  const auto expr = pdmf::instances::gen_idempotent_instance(cfg.n, cfg.m, cfg.rank,
                                                             cfg.degree, cfg.epsilon, cfg.seed);
  write_json(cfg.output, pdmf::json_io::expr_to_json(expr));
  return kExitOk;
}

int run_gen_unitary(const RunConfig& cfg) {
  const auto instance = pdmf::instances::gen_symmetric_unitary_instance(
      cfg.n, cfg.m, cfg.degree, cfg.epsilon, cfg.seed);
  write_json(cfg.output, pdmf::json_io::expr_to_json(instance.u));
  if (!cfg.vtrue_output.empty()) {
    write_json(cfg.vtrue_output, pdmf::json_io::expr_to_json(instance.v_true));
  }
  return kExitOk;
}

int run_diagonalize(const RunConfig& cfg) {
  const auto expr = pdmf::json_io::expr_from_json(read_json(cfg.input));
  const int n = require_nvars(expr);

  pdmf::kato::TransportOptions opt;
  opt.tol = tolerances(cfg);
  const auto result = pdmf::diag1::diagonalize_real_symmetric(
      expr, n, pdmf::diag1::GridParams{cfg.radial, cfg.angular}, cfg.transport_steps, opt);

  json out;
  out["kind"] = "diag1_result";
  out["config"] = diag_config_json(cfg);
  out["expr"] = pdmf::json_io::expr_to_json(expr);
  out["grid"] = pdmf::json_io::grid_to_json(*result.conjugator.grid);
  out["frames"] = pdmf::json_io::values_to_json(result.conjugator.values);
  out["rank"] = result.rank;
  out["min_singular_value"] = result.min_singular_value;
  out["report"] = pdmf::json_io::report_to_json(result.report);
  write_json(cfg.output, out);

  std::cout << "diagonalize: rank " << result.rank << ", final residual "
            << result.report.final_residual << ", symmetry residual "
            << result.report.symmetry_residual << "\n";

  const bool ok = result.report.final_residual <= cfg.tol_resid &&
                  result.report.symmetry_residual <= cfg.tol_exact;
  return ok ? kExitOk : kExitTolerance;
}

int run_factorize(const RunConfig& cfg) {
  const auto expr = pdmf::json_io::expr_from_json(read_json(cfg.input));
  const int n = require_nvars(expr);

  pdmf::factor2::FactorizationConfig fcfg;
  fcfg.ode_steps = cfg.ode_steps;
  fcfg.tol = tolerances(cfg);
  fcfg.grid_radial = cfg.radial;
  fcfg.grid_angular = cfg.angular;
  const pdmf::funcrep::DomainDescriptor domain{n, n, false};
  auto grid = std::make_shared<const pdmf::funcrep::ConjClosedGrid>(
      pdmf::funcrep::build_grid(domain, cfg.radial, cfg.angular, cfg.interval));
  const auto result = pdmf::factor2::factorize_symmetric(expr, grid, fcfg);

  json out;
  out["kind"] = "factor2_result";
  out["config"] = factor_config_json(cfg);
  out["expr"] = pdmf::json_io::expr_to_json(expr);
  out["grid"] = pdmf::json_io::grid_to_json(*result.factors.grid);
  out["factors"] = pdmf::json_io::values_to_json(result.factors.values);
  out["report"] = pdmf::json_io::report_to_json(result.report);
  write_json(cfg.output, out);

  std::cout << "factorize: reconstruction residual "
            << result.report.reconstruction_residual << ", star residual "
            << result.report.star_residual << "\n";

  return result.report.reconstruction_residual <= cfg.tol_resid ? kExitOk : kExitTolerance;
}

int run_verify(const RunConfig& cfg) {
  const json stored = read_json(cfg.input);
  const std::string kind = stored.at("kind").get<std::string>();
  const auto expr = pdmf::json_io::expr_from_json(stored.at("expr"));
  const auto grid = std::make_shared<const pdmf::funcrep::ConjClosedGrid>(
      pdmf::json_io::grid_from_json(stored.at("grid")));
  const json& config = stored.at("config");
  const double tol_resid = config.at("tol_resid").get<double>();
  pdmf::Tolerances tol;
  tol.resid = tol_resid;
  tol.exact = config.at("tol_exact").get<double>();

  if (kind == "diag1_result") {
    const auto frames = pdmf::json_io::values_from_json(stored.at("frames"));
    const pdmf::funcrep::GridMatrixFunction s(grid, frames);
    const auto rank = stored.at("rank").get<Eigen::Index>();
    const pdmf::CMatrix projector = pdmf::numc::rank_projector(frames.front().rows(), rank);

    double residual = 0.0;
    double symmetry = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const pdmf::CMatrix pz = pdmf::funcrep::evaluate(expr, grid->points[i], tol);
      const pdmf::CMatrix& v = s.values[i];
      residual = std::max(residual,
                          (v.partialPivLu().solve(pz * v) - projector).norm());
      symmetry = std::max(
          symmetry, (s.values[i] - s.values[grid->conj_index[i]].conjugate()).norm());
    }

    pdmf::diag1::VerificationReport report =
        pdmf::json_io::diag_report_from_json(stored.at("report"));
    report.final_residual = residual;
    report.symmetry_residual = symmetry;
    if (!report.stages.empty()) {
      report.stages.back().residual = residual;
    }
    write_json(cfg.output, pdmf::json_io::report_to_json(report));
    std::cout << "verify: final residual " << residual << ", symmetry residual "
              << symmetry << "\n";
    return (residual <= tol_resid && symmetry <= tol.exact) ? kExitOk : kExitTolerance;
  }

  if (kind == "factor2_result") {
    const auto factors = pdmf::json_io::values_from_json(stored.at("factors"));
    const pdmf::funcrep::GridMatrixFunction v(grid, factors);

    pdmf::factor2::FactorizationReport report;
    report.star_residual = pdmf::factor2::star_relation_residual(expr, *grid, tol);
    double reconstruction = 0.0;
    const pdmf::CMatrix identity =
        pdmf::CMatrix::Identity(factors.front().rows(), factors.front().cols());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const pdmf::CMatrix uz = pdmf::funcrep::evaluate(expr, grid->points[i], tol);
      const pdmf::CMatrix mate_conj = v.values[grid->conj_index[i]].conjugate();
      const pdmf::CMatrix rebuilt = v.values[i] * mate_conj.partialPivLu().inverse();
      reconstruction = std::max(reconstruction, (uz - rebuilt).norm());
    }
    report.reconstruction_residual = reconstruction;
    report.min_singular_value = pdmf::funcrep::invertibility_margin(v);
    // Holomorphy diagnostic recomputed through the stored polar layout.
    report.holomorphy_diag = pdmf::factor2::holomorphy_diagnostic(
        v, config.at("radial").get<int>(), config.at("angular").get<int>());
    write_json(cfg.output, pdmf::json_io::report_to_json(report));
    std::cout << "verify: reconstruction residual " << reconstruction << "\n";
    return reconstruction <= tol_resid ? kExitOk : kExitTolerance;
  }

  throw pdmf::Error("verify: unknown result kind '" + kind + "'");
}

int run_norm(const RunConfig& cfg) {
  const auto expr = pdmf::json_io::expr_from_json(read_json(cfg.input));
  if (expr->kind() != pdmf::funcrep::ExprKind::Poly) {
    throw pdmf::Error("norm: input must be a polynomial expression");
  }
  const pdmf::funcrep::Poly& poly = expr->poly();
  const pdmf::funcrep::DomainDescriptor domain{poly.nvars(), poly.nvars(), false};
  const auto grid =
      pdmf::funcrep::build_grid(domain, cfg.radial, cfg.angular, cfg.interval);
  const double value = pdmf::funcrep::dn_norm(poly, cfg.norm_order, grid);

  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  std::cout << buffer << "\n";
  if (!cfg.output.empty()) {
    write_json(cfg.output, json{{"dn_norm", value}, {"N", cfg.norm_order}});
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-function diagonalization and symmetric factorization on the polydisc"};
  app.require_subcommand(1);

  RunConfig cfg;

  const auto add_grid_flags = [&cfg](CLI::App* cmd) {
    cmd->add_option("--radial", cfg.radial, "radii per disc factor");
    cmd->add_option("--angular", cfg.angular, "angles per disc factor (even)");
    cmd->add_option("--interval", cfg.interval, "points per interval factor");
  };
  const auto add_tol_flags = [&cfg](CLI::App* cmd) {
    cmd->add_option("--tol-resid", cfg.tol_resid, "residual tolerance");
    cmd->add_option("--tol-exact", cfg.tol_exact, "exactness tolerance");
  };

  CLI::App* gen_idem = app.add_subcommand("gen-idempotent",
                                          "generate a real-symmetric idempotent instance");
  gen_idem->add_option("--n", cfg.n, "variable count")->required();
  gen_idem->add_option("--m", cfg.m, "matrix size")->required();
  gen_idem->add_option("--rank", cfg.rank, "projector rank")->required();
  gen_idem->add_option("--degree", cfg.degree, "polynomial degree");
  gen_idem->add_option("--epsilon", cfg.epsilon, "perturbation strength");
  gen_idem->add_option("--seed", cfg.seed, "rng seed");
  gen_idem->add_option("--output", cfg.output, "instance file")->required();

  CLI::App* gen_uni = app.add_subcommand("gen-unitary",
                                         "generate a star-unitary instance");
  gen_uni->add_option("--n", cfg.n, "variable count")->required();
  gen_uni->add_option("--m", cfg.m, "matrix size")->required();
  gen_uni->add_option("--degree", cfg.degree, "polynomial degree");
  gen_uni->add_option("--epsilon", cfg.epsilon, "perturbation strength");
  gen_uni->add_option("--seed", cfg.seed, "rng seed");
  gen_uni->add_option("--output", cfg.output, "instance file")->required();
  gen_uni->add_option("--vtrue-output", cfg.vtrue_output, "write the generating factor too");

  CLI::App* diag = app.add_subcommand("diagonalize",
                                      "conjugate an idempotent instance to diag(I_rank, 0)");
  diag->add_option("--input", cfg.input, "instance file")->required();
  diag->add_option("--output", cfg.output, "result file")->required();
  diag->add_option("--transport-steps", cfg.transport_steps, "RK4 steps per transport");
  add_grid_flags(diag);
  add_tol_flags(diag);

  CLI::App* fact = app.add_subcommand("factorize",
                                      "compute the symmetric factorization of a star-unitary instance");
  fact->add_option("--input", cfg.input, "instance file")->required();
  fact->add_option("--output", cfg.output, "result file")->required();
  fact->add_option("--ode-steps", cfg.ode_steps, "RK4 steps for the homotopy");
  add_grid_flags(fact);
  add_tol_flags(fact);

  CLI::App* verify = app.add_subcommand("verify",
                                        "recompute the residuals of a stored result");
  verify->add_option("--input", cfg.input, "result file")->required();
  verify->add_option("--output", cfg.output, "report file")->required();

  CLI::App* norm = app.add_subcommand("norm", "weighted derivative norm of a polynomial");
  norm->add_option("--input", cfg.input, "polynomial file")->required();
  norm->add_option("--N", cfg.norm_order, "derivative order")->required();
  norm->add_option("--output", cfg.output, "optional report file");
  add_grid_flags(norm);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_idem->parsed()) {
      return run_gen_idempotent(cfg);
    }
    if (gen_uni->parsed()) {
      return run_gen_unitary(cfg);
    }
    if (diag->parsed()) {
      return run_diagonalize(cfg);
    }
    if (fact->parsed()) {
      return run_factorize(cfg);
    }
    if (verify->parsed()) {
      return run_verify(cfg);
    }
    if (norm->parsed()) {
      return run_norm(cfg);
    }
  } catch (const pdmf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStructural;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStructural;
  }
  return kExitStructural;
}
