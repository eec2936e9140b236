#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sparseid/config.hpp"

using namespace sparseid;

TEST_CASE("minimal config resolves the reference defaults") {
  const ExperimentSpec spec = parse_config_text("case = I\ngrid.dx = 0.05\n");
  const ProblemConfig& cfg = spec.problem;
  CHECK(cfg.lx == 2.0);
  CHECK(cfg.ly == 1.0);
  CHECK(cfg.dx == 0.05);
  CHECK(cfg.dy == 0.05);
  CHECK(cfg.dt == 0.05);
  CHECK(cfg.T == 0.1);
  CHECK(cfg.pdhg.theta == 1.0);
  CHECK(cfg.pdhg.r == 6.0);
  CHECK_FALSE(cfg.pdhg.s.has_value());
  CHECK(cfg.pdhg.rho == 1.9);
  CHECK(cfg.pdhg.sigma == 1.9);
  CHECK(cfg.pdhg.tau == 1e-2);
  CHECK(cfg.pdhg.beta == doctest::Approx(std::pow(0.05, 4)).epsilon(1e-15));
  CHECK(cfg.pdhg.tol == 1e-5);
  CHECK(cfg.pdhg.kmax == 1000);
  CHECK(cfg.reference.atoms.size() == 4);
  CHECK(cfg.algorithm == AlgorithmKind::Pdhg);
  CHECK_FALSE(cfg.diagnostics);

  // every applied default leaves a provenance note
  CHECK(spec.provenance.size() >= 10);
  const bool beta_note = std::any_of(
      spec.provenance.begin(), spec.provenance.end(),
      [](const std::string& n) { return n.find("pdhg.beta") != std::string::npos; });
  CHECK(beta_note);
}

TEST_CASE("overrides produce the unrelaxed configuration") {
  const ExperimentSpec spec =
      parse_config_text("case = I\n", {"pdhg.rho=1.0", "pdhg.sigma=1.0"});
  CHECK(spec.problem.pdhg.rho == 1.0);
  CHECK(spec.problem.pdhg.sigma == 1.0);
}

TEST_CASE("relaxation rule violations surface as semantic errors") {
  CHECK_THROWS_AS(parse_config_text("case = I\npdhg.rho = 2.5\npdhg.sigma = 2.5\n"),
                  SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = I\npdhg.rho = 1.9\npdhg.sigma = 1.0\n"),
                  SemanticError);
}

TEST_CASE("tiling and time-step consistency checks") {
  CHECK_THROWS_AS(parse_config_text("case = I\npde.T = 0.13\n"), SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = I\ngrid.dx = 0.03\n"), SemanticError);
}

TEST_CASE("syntax errors carry line diagnostics") {
  try {
    parse_config_text("case = I\nthis line has no equals sign\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("case = I\npdhg.r = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("case = I\n", {"broken-override"}), ParseError);
}

TEST_CASE("unknown keys and cases are rejected") {
  CHECK_THROWS_AS(parse_config_text("case = I\nnot.a.key = 1\n"), SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = IV\n"), UnknownCase);
}

TEST_CASE("missing config file raises ParseError") {
  CHECK_THROWS_AS(parse_config("/nonexistent/config.cfg"), ParseError);
}

TEST_CASE("custom cases take explicit regions and atoms") {
  const std::string text =
      "case = custom\n"
      "pde.region = 0,0,1,1, 0.08, 1,2\n"
      "pde.region = 1,0,2,1, 0.05, 1,2\n"
      "source.atom = 1.5,0.5,100\n"
      "source.atom = 0.5,0.5,60\n";
  const ExperimentSpec spec = parse_config_text(text);
  CHECK(spec.problem.coeffs.regions.size() == 2);
  CHECK(spec.problem.coeffs.at(0.5, 0.5).d == 0.08);
  CHECK(spec.problem.reference.atoms.size() == 2);
  CHECK(spec.problem.reference.atoms[0].x == 0.5);
  CHECK_FALSE(spec.problem.case_id.has_value());

  CHECK_THROWS_AS(parse_config_text("case = custom\n"), SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = custom\npde.region = 1,2,3\n"), SemanticError);
}

TEST_CASE("scenario, algorithm, and batch settings parse") {
  const std::string text =
      "case = II\n"
      "scenario.kind = noisy\n"
      "scenario.level = 0.1\n"
      "scenario.seed = 42\n"
      "algorithm = gd\n"
      "gd.eta = 0.5\n"
      "bench.variants = cp,gd\n"
      "mesh.pairs = 0.1,0.05; 0.05,0.025\n";
  const ExperimentSpec spec = parse_config_text(text);
  CHECK(spec.problem.scenario.kind == ScenarioSpec::Kind::Noisy);
  CHECK(spec.problem.scenario.level == 0.1);
  CHECK(spec.problem.scenario.seed == 42);
  CHECK(spec.problem.algorithm == AlgorithmKind::Gd);
  CHECK(*spec.problem.gd.eta == 0.5);
  REQUIRE(spec.bench_variants.size() == 2);
  CHECK(spec.bench_variants[0] == "cp");
  REQUIRE(spec.mesh_pairs.size() == 2);
  CHECK(spec.mesh_pairs[1].first == 0.05);
  CHECK(spec.mesh_pairs[1].second == 0.025);

  CHECK_THROWS_AS(parse_config_text("case = I\nscenario.kind = weird\n"), SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = I\nalgorithm = annealing\n"), SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = I\nscenario.kind = noisy\nscenario.level = 1.2\n"),
                  SemanticError);
  CHECK_THROWS_AS(parse_config_text("case = I\nbench.variants = cp,warp\n"), SemanticError);
}

TEST_CASE("gd parameters inherit the shared regularization defaults") {
  const ExperimentSpec spec = parse_config_text("case = I\npdhg.tau = 0.5\npdhg.beta = 0.25\n");
  CHECK(spec.problem.gd.tau == 0.5);
  CHECK(spec.problem.gd.beta == 0.25);
  CHECK_FALSE(spec.problem.gd.eta.has_value());
}

TEST_CASE("comments and blank lines are ignored") {
  const ExperimentSpec spec = parse_config_text(
      "# leading comment\n\ncase = III   # trailing comment\n\n  \n");
  REQUIRE(spec.problem.case_id.has_value());
  CHECK(*spec.problem.case_id == CaseId::III);
}
