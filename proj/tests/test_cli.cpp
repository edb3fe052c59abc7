#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef PDMF_CLI_BIN
#error "PDMF_CLI_BIN must point at the pdmf binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / "pdmf_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(PDMF_CLI_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args, const Sandbox& box) {
  const std::string out = box.path("stdout.txt");
  const std::string cmd = std::string(PDMF_CLI_BIN) + " " + args + " > " + out + " 2>/dev/null";
  (void)std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("cli: generation is deterministic and structurally valid") {
  Sandbox box;
  CHECK(run("gen-idempotent --n 1 --m 3 --rank 1 --degree 2 --epsilon 0.3 --seed 11 --output " +
            box.path("a.json")) == 0);
  CHECK(run("gen-idempotent --n 1 --m 3 --rank 1 --degree 2 --epsilon 0.3 --seed 11 --output " +
            box.path("b.json")) == 0);
  CHECK(slurp(box.path("a.json")) == slurp(box.path("b.json")));

  // Different seed, different instance.
  CHECK(run("gen-idempotent --n 1 --m 3 --rank 1 --degree 2 --epsilon 0.3 --seed 12 --output " +
            box.path("c.json")) == 0);
  CHECK(slurp(box.path("a.json")) != slurp(box.path("c.json")));

  const json inst = json::parse(slurp(box.path("a.json")));
  CHECK(inst.at("kind") == "product");
  CHECK(inst.at("children").size() == 3);
}

TEST_CASE("cli: diagonalize, verify, and byte-stable reports") {
  Sandbox box;
  REQUIRE(run("gen-idempotent --n 1 --m 2 --rank 1 --degree 1 --epsilon 0.25 --seed 4 --output " +
              box.path("inst.json")) == 0);

  const std::string diag_args = "diagonalize --input " + box.path("inst.json") +
                                " --radial 5 --angular 8 --transport-steps 100 --output ";
  CHECK(run(diag_args + box.path("r1.json")) == 0);
  CHECK(run(diag_args + box.path("r2.json")) == 0);
  CHECK(slurp(box.path("r1.json")) == slurp(box.path("r2.json")));

  CHECK(run("verify --input " + box.path("r1.json") + " --output " + box.path("rep.json")) == 0);
  const json result = json::parse(slurp(box.path("r1.json")));
  const json report = json::parse(slurp(box.path("rep.json")));
  CHECK(result.at("report").dump() == report.dump());

  // Verification is side-effect-free on its input.
  CHECK(run("verify --input " + box.path("r1.json") + " --output " + box.path("rep2.json")) == 0);
  CHECK(slurp(box.path("rep.json")) == slurp(box.path("rep2.json")));

  // A tolerance between the structural pre-check residuals (~1e-15) and the
  // discretization residual (~1e-12) demotes the exit code to 2.
  CHECK(run(diag_args + box.path("r3.json") + " --tol-resid 1e-13") == 2);
}

TEST_CASE("cli: factorize and verify round trip") {
  Sandbox box;
  REQUIRE(run("gen-unitary --n 1 --m 2 --degree 2 --epsilon 0.3 --seed 9 --output " +
              box.path("u.json") + " --vtrue-output " + box.path("v.json")) == 0);
  CHECK(fs::exists(box.path("v.json")));

  const std::string fact_args = "factorize --input " + box.path("u.json") +
                                " --radial 5 --angular 8 --ode-steps 100 --output ";
  CHECK(run(fact_args + box.path("f1.json")) == 0);
  CHECK(run(fact_args + box.path("f2.json")) == 0);
  CHECK(slurp(box.path("f1.json")) == slurp(box.path("f2.json")));

  CHECK(run("verify --input " + box.path("f1.json") + " --output " + box.path("frep.json")) == 0);
  const json result = json::parse(slurp(box.path("f1.json")));
  const json report = json::parse(slurp(box.path("frep.json")));
  CHECK(result.at("report").dump() == report.dump());
}

TEST_CASE("cli: norm command evaluates the weighted derivative norm") {
  Sandbox box;
  // f(z) = z^2 over one variable.
  const json poly = {{"kind", "poly"},
                     {"dims", {1, 1}},
                     {"nvars", 1},
                     {"terms", {{{"alpha", {2}}, {"coeff", {{{1.0, 0.0}}}}}}}};
  {
    std::ofstream out(box.path("p.json"));
    out << poly.dump(2) << "\n";
  }
  const std::string text =
      run_capture("norm --input " + box.path("p.json") + " --N 2 --radial 5 --angular 8", box);
  CHECK(text.substr(0, 1) == "4");
}

TEST_CASE("cli: structural failures exit with code 3") {
  Sandbox box;
  CHECK(run("diagonalize --input " + box.path("missing.json") + " --output " +
            box.path("out.json")) == 3);

  // Factorize on an idempotent instance: the star relation fails structurally.
  REQUIRE(run("gen-idempotent --n 1 --m 2 --rank 1 --degree 1 --epsilon 0.2 --seed 2 --output " +
              box.path("inst.json")) == 0);
  CHECK(run("factorize --input " + box.path("inst.json") + " --output " +
            box.path("out.json")) == 3);

  // Diagonalize on a star-unitary instance: not idempotent.
  REQUIRE(run("gen-unitary --n 1 --m 2 --degree 1 --epsilon 0.2 --seed 2 --output " +
              box.path("u.json")) == 0);
  CHECK(run("diagonalize --input " + box.path("u.json") + " --output " +
            box.path("out.json")) == 3);
}
