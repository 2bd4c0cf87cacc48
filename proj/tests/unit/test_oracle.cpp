#include <cmath>

#include "doctest.h"
#include "hyperrate/error.hpp"
#include "hyperrate/oracle.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

TEST_CASE("brute-force edges on the ternary fixtures") {
  CHECK(edges_string(brute_maximal_edges(gen::fixture("ternary_exact"), 0.0)) == "{1} {2} {3}");
  CHECK(edges_string(brute_maximal_edges(gen::fixture("ternary_gap"), 0.0)) == "{1,2} {2,3}");
  CHECK(edges_string(brute_maximal_edges(gen::fixture("greater_side"), 0.0)) == "{1,2} {2,3}");
}

TEST_CASE("brute radius") {
  CHECK(brute_radius({{0, 0}, {0, 1}, {1, 0}, {1, 1}}) == doctest::Approx(std::sqrt(0.5)));
  CHECK(brute_radius({{2.0}}) == 0.0);
  CHECK(brute_radius({{0, 0}, {2, 0}, {1, 0.1}}) == doctest::Approx(1.0));
}

TEST_CASE("grid rate on the ternary identity") {
  auto inst = gen::fixture("ternary_half");
  auto g = grid_min_rate(inst, 0.5);
  CHECK(std::abs(g.value - 2.0 / 3) <= 0.02);
  CHECK(g.lower <= 2.0 / 3 + 1e-12);
  CHECK(g.value >= 2.0 / 3 - 1e-12);
  CHECK(grid_min_rate(inst, 1.0).value == 0.0);
  auto zero = grid_min_rate(inst, 0.0);
  CHECK(std::abs(zero.value - std::log2(3.0)) <= zero.tolerance + 1e-12);
  GridSpec bad;
  bad.m = 1;
  CHECK_THROWS_AS(grid_min_rate(inst, 0.5, bad), ValidationError);
  GridSpec tiny;
  tiny.budget = 5;
  CHECK_THROWS_AS(grid_min_rate(inst, 0.5, tiny), CapError);
}

TEST_CASE("property: grid oracle brackets the solver") {
  gen::Rng rng(61);
  for (int t = 0; t < 50; ++t) {
    ProblemInstance inst = t % 2 ? gen::p2p(rng, gen::uniform_int(rng, 2, 4), 1, gen::lattice_eps(rng))
                                 : gen::side_info(rng, gen::uniform_int(rng, 2, 4), gen::uniform_int(rng, 1, 3), 1,
                                                  gen::lattice_eps(rng));
    GridSpec g;
    g.m = inst.setting == Setting::p2p ? 60 : 24;
    GridResult grid;
    for (;; g.m /= 2) {
      try {
        grid = grid_min_rate(inst, inst.tolerance(), g);
        break;
      } catch (const CapError&) {
      }
    }
    double r = rate_scalar(inst, inst.tolerance()).rate;
    CHECK(r >= grid.value - grid.tolerance - 1e-6);
    CHECK(r <= grid.value + 1e-6);
  }
}

TEST_CASE("zero-distortion audit") {
  auto inst = gen::fixture("ternary_half");
  auto r = rate_p2p(inst, 0.5);
  CHECK(verify_zero_distortion(inst, r, 0.5));
  CHECK_FALSE(verify_zero_distortion(inst, r, 0.4));

  // Symbol 1 sent to {2,3}.
  auto bad = r;
  auto& ch = bad.channels[0];
  ch.probs = {0.0, 1.0, 0.5, 0.5, 0.0, 1.0};
  CHECK_FALSE(verify_zero_distortion(inst, bad, 0.5));

  // Constant reconstruction at the centre of the full image.
  TestChannel one;
  one.name = "W|X";
  one.inputs = {0};
  one.input_shape = {3};
  one.output_shape = {1};
  one.probs = {1.0, 1.0, 1.0};
  one.mask = {1, 1, 1};
  Decoder d;
  d.eps = 1.0;
  d.sees = {0};
  d.table[{0}] = {2.0};
  CHECK(verify_zero_distortion(inst, {one}, {d}));
  d.eps = 0.9;
  CHECK_FALSE(verify_zero_distortion(inst, {one}, {d}));
  Decoder sec_mode;
  sec_mode.eps = 1.0;
  sec_mode.sees = {0};
  CHECK(verify_zero_distortion(inst, {one}, {sec_mode}));
  one.probs = {1.0, 0.5, 1.0};
  CHECK_FALSE(verify_zero_distortion(inst, {one}, {sec_mode}));
}

TEST_CASE("general auxiliaries") {
  auto pair = gen::fixture("bit_pair");
  GridSpec g;
  g.m = 12;
  auto x = general_aux_search(pair, 0.5, g);
  CHECK(x.found);
  CHECK(std::abs(x.value - 1.0) <= 1e-9);
  auto full = general_aux_search(pair, 0.0, g);
  CHECK(std::abs(full.value - 2.0) <= 1e-9);

  JointPmf pmf = pair.pmf;
  auto flat = tabulate("c", pmf, {0, 1}, 1, [](std::span<const std::size_t>) { return std::vector<double>{1.0}; });
  auto constant = make_instance(Setting::distributed, pmf, {flat}, {0.0});
  CHECK(general_aux_search(constant, 0.0, g).value <= 1e-12);

  auto half = gen::fixture("ternary_half");
  auto scalar = general_aux_search(half, 0.5, g);
  CHECK(scalar.value >= 2.0 / 3 - 1e-9);
  CHECK(scalar.value <= 2.0 / 3 + 0.05);
  auto parity = gen::fixture("parity_side");
  CHECK(std::abs(general_aux_search(parity, 0.0, g).value - rate_side_info(parity, 0.0).rate) <= 1e-6);

  GridSpec big;
  big.m = 12;
  big.budget = 10;
  CHECK_THROWS_AS(general_aux_search(pair, 0.5, big), CapError);
}
