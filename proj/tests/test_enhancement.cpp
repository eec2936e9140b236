#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "sparseid/enhancement.hpp"
#include "sparseid/experiments.hpp"

using namespace sparseid;
namespace fs = std::filesystem;

namespace {

TimeStepOperator reference_operator() {
  const ProblemConfig cfg = make_case(CaseId::I);
  return assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
}

}  // namespace

TEST_CASE("find_local_maxima: isolated spike") {
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  Field f(g);
  f.at(10, 10) = 7.0;
  const auto nodes = find_local_maxima(f, 0.5);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0] == GridNode{10, 10});
}

TEST_CASE("find_local_maxima: threshold arithmetic with two spikes") {
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  Field f(g);
  f.at(10, 10) = 5.0;
  f.at(30, 10) = -3.0;  // magnitude counts, sign does not
  CHECK(find_local_maxima(f, 0.5).size() == 2);
  const auto top = find_local_maxima(f, 0.7);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == GridNode{10, 10});
}

TEST_CASE("find_local_maxima: plateau keeps only the smallest node") {
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  Field f(g);
  f.at(10, 10) = 5.0;
  f.at(11, 10) = 5.0;
  f.at(11, 11) = 5.0;
  const auto nodes = find_local_maxima(f, 0.5);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0] == GridNode{10, 10});
}

TEST_CASE("find_local_maxima: error cases") {
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  CHECK_THROWS_AS(find_local_maxima(Field(g), 0.1), EmptyField);

  Field flat(g);
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  CHECK_THROWS_AS(find_local_maxima(flat, 0.1), NoMaxima);

  Field f(g);
  f.at(5, 5) = 1.0;
  CHECK_THROWS_AS(find_local_maxima(f, 0.0), SemanticError);
  CHECK_THROWS_AS(find_local_maxima(f, 1.0), SemanticError);
}

TEST_CASE("find_local_maxima: a single interior node counts as a maximum") {
  const Grid2D g = make_grid(1.0, 1.0, 0.5, 0.5);
  Field f(g);
  f.at(1, 1) = 2.0;
  const auto nodes = find_local_maxima(f, 0.5);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0] == GridNode{1, 1});
}

TEST_CASE("build_response_matrix columns are unit-delta final states") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();
  const std::vector<GridNode> locs = {{30, 10}};
  const ResponseMatrix R = build_response_matrix(op, locs);
  REQUIRE(R.columns.size() == 1);
  const Field expect = op.forward_solve(discrete_delta(g, g.x(30), g.y(10), 1.0));
  for (size_t k = 0; k < expect.values.size(); ++k) {
    CHECK(R.columns[0].values[k] == expect.values[k]);
  }

  CHECK_THROWS_AS(build_response_matrix(op, {}), SemanticError);
  CHECK_THROWS_AS(build_response_matrix(op, {{5, 5}, {5, 5}}), SemanticError);
}

TEST_CASE("distant sources under pure diffusion give a diagonally dominant Gram") {
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  const TimeStepOperator op =
      assemble_operator(g, Coefficients::uniform(0.05, 0.0, 0.0), 0.05, 2);
  const ResponseMatrix R = build_response_matrix(op, {{10, 10}, {30, 10}});
  const double g00 = inner_product(R.columns[0], R.columns[0]);
  const double g11 = inner_product(R.columns[1], R.columns[1]);
  const double g01 = inner_product(R.columns[0], R.columns[1]);
  CHECK(g00 > std::abs(g01));
  CHECK(g11 > std::abs(g01));
}

TEST_CASE("solve_intensities: single-atom and in-span exactness") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();

  {
    const double alpha = 37.5;
    const Field uT = op.forward_solve(discrete_delta(g, g.x(12), g.y(7), alpha));
    const ResponseMatrix R = build_response_matrix(op, {{12, 7}});
    const auto a = solve_intensities(R, uT);
    REQUIRE(a.size() == 1);
    CHECK(a[0] == doctest::Approx(alpha).epsilon(1e-10));
  }

  {
    const ResponseMatrix R = build_response_matrix(op, {{30, 10}, {20, 15}, {10, 10}, {15, 5}});
    const auto zero = solve_intensities(R, Field(g));
    for (double a : zero) CHECK(a == 0.0);

    const Field uT = op.forward_solve(source_to_field(reference_source(), g));
    const auto a = solve_intensities(R, uT);
    REQUIRE(a.size() == 4);
    CHECK(a[0] == doctest::Approx(100.0).epsilon(1e-8));
    CHECK(a[1] == doctest::Approx(85.0).epsilon(1e-8));
    CHECK(a[2] == doctest::Approx(60.0).epsilon(1e-8));
    CHECK(a[3] == doctest::Approx(90.0).epsilon(1e-8));
  }
}

TEST_CASE("solve_intensities rejects nearly coincident columns") {
  // Long diffusion makes adjacent-node responses almost parallel.
  const Grid2D g = make_grid(2.0, 1.0, 0.05, 0.05);
  const TimeStepOperator op =
      assemble_operator(g, Coefficients::uniform(0.5, 0.0, 0.0), 0.05, 200);
  const ResponseMatrix R = build_response_matrix(op, {{20, 10}, {21, 10}});
  CHECK_THROWS_AS(solve_intensities(R, Field(g)), SingularGram);
}

TEST_CASE("least-squares residual is orthogonal to the response columns") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field uT(g);
  for (double& v : uT.values) v = dist(rng);

  const ResponseMatrix R = build_response_matrix(op, {{10, 10}, {30, 10}, {20, 15}});
  const auto alpha = solve_intensities(R, uT);
  Field residual = uT;
  for (size_t c = 0; c < R.columns.size(); ++c) {
    for (size_t k = 0; k < residual.values.size(); ++k) {
      residual.values[k] -= alpha[c] * R.columns[c].values[k];
    }
  }
  for (size_t c = 0; c < R.columns.size(); ++c) {
    const double proj = inner_product(R.columns[c], residual);
    CHECK(std::abs(proj) <= 1e-10 * norm_l2(R.columns[c]) * norm_l2(uT));
  }
}

TEST_CASE("enhance composes location search and intensity fit") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();

  const Field source = discrete_delta(g, 1.0, 0.5, 42.0);
  const Field uT = op.forward_solve(source);
  // a caricature of the optimizer output: correct bump location, wrong scale
  Field u0_star(g);
  u0_star.at(20, 10) = 3.0;
  u0_star.at(19, 10) = 1.0;
  u0_star.at(21, 10) = 1.0;

  const SparseSource src = enhance(u0_star, op, uT, 0.5);
  REQUIRE(src.atoms.size() == 1);
  CHECK(src.atoms[0].x == doctest::Approx(1.0));
  CHECK(src.atoms[0].y == doctest::Approx(0.5));
  CHECK(src.atoms[0].intensity == doctest::Approx(42.0).epsilon(1e-10));

  CHECK_THROWS_AS(enhance(Field(g), op, uT, 0.1), EmptyField);
}

TEST_CASE("span-exact targets are fitted to machine precision") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();
  const Field uT = op.forward_solve(source_to_field(reference_source(), g));
  const ResponseMatrix R = build_response_matrix(op, {{30, 10}, {20, 15}, {10, 10}, {15, 5}});
  const auto alpha = solve_intensities(R, uT);
  Field fit(g);
  for (size_t c = 0; c < R.columns.size(); ++c) {
    for (size_t k = 0; k < fit.values.size(); ++k) {
      fit.values[k] += alpha[c] * R.columns[c].values[k];
    }
  }
  Field diff = fit;
  for (size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= uT.values[k];
  CHECK(norm_l2(diff) <= 1e-8 * norm_l2(uT));
}

TEST_CASE("intensity fit is invariant under location permutations") {
  const TimeStepOperator op = reference_operator();
  const Grid2D& g = op.grid();
  const Field uT = op.forward_solve(source_to_field(reference_source(), g));

  const std::vector<GridNode> order_a = {{30, 10}, {20, 15}, {10, 10}, {15, 5}};
  const std::vector<GridNode> order_b = {{10, 10}, {15, 5}, {30, 10}, {20, 15}};
  const auto alpha_a = solve_intensities(build_response_matrix(op, order_a), uT);
  const auto alpha_b = solve_intensities(build_response_matrix(op, order_b), uT);
  CHECK(alpha_a[0] == doctest::Approx(alpha_b[2]).epsilon(1e-12));
  CHECK(alpha_a[1] == doctest::Approx(alpha_b[3]).epsilon(1e-12));
  CHECK(alpha_a[2] == doctest::Approx(alpha_b[0]).epsilon(1e-12));
  CHECK(alpha_a[3] == doctest::Approx(alpha_b[1]).epsilon(1e-12));
}

TEST_CASE("sparse source serialization round-trips and stays sorted") {
  SparseSource src;
  src.atoms = {{1.5, 0.5, 100.0}, {0.5, 0.5, -60.25}, {1.5, 0.25, 1e-7}};
  src.sort();
  CHECK(src.atoms[0].x == 0.5);
  CHECK(src.atoms[1].y == 0.25);

  const fs::path path = fs::temp_directory_path() / "sparseid_source_roundtrip.txt";
  dump_source(src, path);
  const SparseSource back = load_source(path);
  REQUIRE(back.atoms.size() == src.atoms.size());
  for (size_t k = 0; k < src.atoms.size(); ++k) {
    CHECK(back.atoms[k].x == src.atoms[k].x);
    CHECK(back.atoms[k].y == src.atoms[k].y);
    CHECK(back.atoms[k].intensity == src.atoms[k].intensity);
  }
  fs::remove(path);

  CHECK_THROWS_AS(load_source("/nonexistent/atoms.txt"), IoFailure);
}
